"""Short-time geometry: torsion, the two-level window, and its prediction.

The torsion of the evolution is a conserved scalar built from graph counts
alone; its inverse fourth root bounds how long the walk stays effectively
two-dimensional. Inside that window the closed-form sinusoid tracks the full
Schrodinger solution without diagonalizing anything.
"""

import numpy as np

from qwmaxcut import dynamics, shorttime
from qwmaxcut.graphs import gen_binomial
from qwmaxcut.operators import sector_walk, uniform_plus_state

g = gen_binomial(12, 2 / 3, seed=40)
for gamma in (0.05, 1.0):
    ana = shorttime.analyze(g, gamma)
    print(f"\ngamma = {gamma}")
    print(f"  curvature {ana.curvature:.4g}, torsion {ana.torsion:.4g}")
    print(f"  two-level horizon T^(-1/4) = {ana.horizon:.3f}"
          f"  (whole-graph estimate n*T^(-1/4) = {ana.graph_horizon:.1f})")

    t_window = (0.01 / ana.torsion) ** 0.25     # leakage eps_2d <= 1%
    times = np.linspace(0.0, t_window, 150)
    hp2d, eps = shorttime.two_level_prediction(g, gamma, times)
    traj = dynamics.evolve(sector_walk(g, gamma),
                           uniform_plus_state(12, "spinflip_plus"), times)
    err = np.abs(hp2d - traj.observables["hp"]).max()
    print(f"  within the 1%-leakage window (t <= {t_window:.3f}):")
    print(f"    prediction range [{hp2d.min():.4f}, 0], max abs error {err:.4f}")
