"""Continuous-time quantum walks for MAX-CUT.

Exact desk-scale simulation of the walk exp(-i (H_d + gamma H_p) t)|+>,
short-time geometric predictions, thermalization-based analytic models of its
steady state, and the multi-stage and Trotterized (Floquet) extensions.
"""

from . import dynamics, floquet, graphs, msqw, operators, shorttime, thermal
from .dynamics import (Trajectory, entanglement_entropy, evolve,
                       ground_state_probability, steady_state_hp,
                       time_average_hp)
from .floquet import (FloquetConfig, FloquetDecomposition,
                      corrected_initial_state, effective_hamiltonian,
                      floquet_decompose, floquet_initial_energy,
                      floquet_steady_hp, floquet_thermal_prediction,
                      trotter_state)
from .graphs import (Graph, GraphInvariants, gen_binomial, gen_regular,
                     invariants, max_cut_exact)
from .msqw import (WalkSchedule, predict_msqw_analytic, predict_stage_numeric,
                   run_msqw)
from .operators import (SpectralDecomposition, WalkOperator, build_driver,
                        build_problem, build_walk, diagonalize,
                        reduce_to_plus_sector, sector_walk, spin_flip)
from .shorttime import (ShortTimeAnalysis, analyze, central_moments, curvature,
                        torsion, two_level_prediction)
from .thermal import (DosModel, DosMoments, ThermalPrediction, beta_emg,
                      beta_gaussian, dos_moments, entropy_model, fit_emg,
                      gamma_select, gibbs_expectation, hp_model,
                      solve_beta_exact)

__version__ = "0.1.0"
