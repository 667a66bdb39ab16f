"""Multi-stage quantum walks: piecewise-constant gamma schedules.

Each stage evolves the final state of the previous one under the walk
Hamiltonian at its own gamma; energy is conserved within a stage, so every
stage carries its own Gibbs temperature fixed by the boundary energy. The
analytic route approximates that boundary energy recursively, replacing the
instantaneous problem expectation by the previous stage's steady-state
average.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (Trajectory, driver_expectation, evolve,
                       expand_plus_state, time_average_hp)
from .graphs import Graph
from .operators import (SpectralDecomposition, diagonalize, problem_diagonal,
                        sector_walk, uniform_plus_state)
from . import thermal


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class WalkSchedule:
    """Ordered stages (gamma_k, duration_k), run from |+>.

    The reference schedules increase gamma monotonically; equal consecutive
    gammas are tolerated (they merely extend a stage), decreasing ones are
    rejected.
    """

    stages: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.stages:
            raise ScheduleError("schedule needs at least one stage")
        stages = tuple((float(g), float(d)) for g, d in self.stages)
        for k, (gam, dur) in enumerate(stages):
            if dur <= 0:
                raise ScheduleError(f"stage {k}: duration must be positive, got {dur}")
            if k > 0 and gam < stages[k - 1][0]:
                raise ScheduleError(
                    f"stage {k}: gamma must not decrease ({stages[k-1][0]} -> {gam})")
        object.__setattr__(self, "stages", stages)

    @property
    def gammas(self) -> tuple[float, ...]:
        return tuple(g for g, _ in self.stages)

    def boundary_times(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([d for _, d in self.stages])])


def reference_schedule(l: int = 5, gamma_step: float = 0.5,
                       duration: float = 20.0) -> WalkSchedule:
    """gamma = step, 2*step, ..., l*step with a fixed per-stage duration."""
    return WalkSchedule(tuple((gamma_step * (k + 1), duration) for k in range(l)))


@dataclass
class StageRecord:
    """Per-stage bookkeeping produced by run_msqw."""

    index: int
    gamma: float
    t_start: float
    t_end: float
    entry_state: np.ndarray        # reduced state at the stage entry
    entry_energy: float            # <H_QW^(k)> at entry (conserved in-stage)
    entry_hp: float                # instantaneous <H_p> at entry
    hp_steady: float               # degenerate-pair average within the stage
    spec: SpectralDecomposition = field(repr=False, default=None)


def _state_energy(g: Graph, gamma: float, psi_red: np.ndarray) -> tuple[float, float]:
    full = expand_plus_state(psi_red)[:, None]
    hd = float(driver_expectation(full, g.n)[0])
    hp = float(problem_diagonal(g) @ (np.abs(full[:, 0]) ** 2))
    return hd + gamma * hp, hp


def run_msqw(g: Graph, schedule: WalkSchedule, samples_per_stage: int = 400,
             store_states: bool = False,
             keep_specs: bool = False) -> Trajectory:
    """Sequential exact propagation through the schedule, from |+>.

    Within stage k the evolution runs in the spin-flip-even sector under the
    walk at gamma_k; the boundary state is propagated analytically (not read
    off the sampling grid). Stage records, including the spectral steady
    value per stage, are attached to the trajectory metadata.
    """
    psi = uniform_plus_state(g.n, "spinflip_plus")
    hp_red = problem_diagonal(g)[: psi.shape[0]]
    t0 = 0.0
    all_times, all_obs, stages, stored = [], [], [], []
    for k, (gamma, duration) in enumerate(schedule.stages):
        op = sector_walk(g, gamma)
        spec = diagonalize(op)
        entry_energy, entry_hp = _state_energy(g, gamma, psi)
        hp_steady = time_average_hp(spec, psi, hp_red)
        rel = np.linspace(0.0, duration, samples_per_stage, endpoint=False)
        traj = evolve(op, psi, rel, spec=spec, store_states=store_states)
        all_times.append(t0 + rel)
        all_obs.append(traj.observables)
        if store_states:
            stored.append(traj.states)
        stages.append(StageRecord(
            index=k, gamma=gamma, t_start=t0, t_end=t0 + duration,
            entry_state=psi, entry_energy=entry_energy, entry_hp=entry_hp,
            hp_steady=hp_steady, spec=spec if keep_specs else None))
        amp = spec.states.conj().T @ psi
        psi = spec.states @ (np.exp(-1j * spec.energies * duration) * amp)
        t0 += duration

    observables = {key: np.concatenate([o[key] for o in all_obs])
                   for key in all_obs[0]}
    return Trajectory(
        times=np.concatenate(all_times), observables=observables, n=g.n,
        gamma=float("nan"), sector="spinflip_plus",
        states=np.concatenate(stored, axis=1) if store_states else None,
        meta={"stages": stages, "schedule": schedule, "final_state": psi})


def predict_stage_numeric(g: Graph, schedule: WalkSchedule, k: int,
                          psi_at_boundary: np.ndarray) -> thermal.ThermalPrediction:
    """Exact-Gibbs prediction for stage k from the measured boundary energy.

    Solves Tr[H^(k) rho_beta(H^(k))] = <psi|H^(k)|psi> over the full spectrum
    and evaluates the Gibbs problem energy there.
    """
    gamma = schedule.gammas[k]
    target, _ = _state_energy(g, gamma, psi_at_boundary)
    data = thermal.walk_thermal_data(g, gamma)
    beta = thermal.solve_beta_exact(data, target)
    hp = thermal.gibbs_expectation(data, None, beta)
    lnz = float(np.log(np.exp(-beta * (data.energies - data.energies[0])).sum())
                - beta * data.energies[0])
    entropy = beta * target + lnz
    return thermal.ThermalPrediction(beta=float(beta), hp=float(hp),
                                     entropy=float(entropy), source="exact_gibbs")


def predict_msqw_analytic(g: Graph, schedule: WalkSchedule,
                          dos_kind: str = "emg") -> list[thermal.ThermalPrediction]:
    """Model-based per-stage predictions via the recursive energy estimate.

    Stage 1 starts from the exact constraint -n; stage k adds
    (gamma_k - gamma_{k-1}) times the previous stage's predicted steady
    <H_p-bar> to the previous target.
    """
    preds: list[thermal.ThermalPrediction] = []
    target = -float(g.n)
    prev_gamma = None
    for k, gamma in enumerate(schedule.gammas):
        if prev_gamma is not None:
            target = target + (gamma - prev_gamma) * preds[-1].hp
        try:
            model = thermal.fit_dos_model(g, gamma, dos_kind)
            beta = model.solve_beta(target)
            hp = model.hp_prediction(beta)
            entropy = beta * target + model.log_partition_total(beta)
        except thermal.ThermalError as exc:
            raise thermal.ModelInfeasibleError(f"stage {k}: {exc}") from exc
        preds.append(thermal.ThermalPrediction(beta=float(beta), hp=float(hp),
                                               entropy=float(entropy),
                                               source=dos_kind))
        prev_gamma = gamma
    return preds
