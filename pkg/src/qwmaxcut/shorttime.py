"""Short-time geometry of the walk: curvature, torsion and the two-level limit.

The curvature and torsion of the evolving state are built from the central
moments of the walk Hamiltonian in |+>, which reduce to closed forms in the
edge, triangle and square counts. The torsion bounds how fast the evolution
leaves the two-dimensional subspace spanned by |+> and H|+>; within that
subspace <H_p(t)> is a pure sinusoid.

The leakage after time t is estimated as eps_2d = torsion * t^4; the repo
convention treats eps_2d <= 0.01 as the trustworthy window (the source
analysis only asks for "much less than one").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, invariants


class ShortTimeError(ValueError):
    pass


@dataclass(frozen=True)
class ShortTimeAnalysis:
    """Conserved geometric data of a walk plus the derived validity horizons."""

    curvature: float
    torsion: float
    omega2: float
    horizon: float          # torsion^(-1/4); +inf when the torsion vanishes
    graph_horizon: float    # n * horizon, a proxy for seeing the whole graph
    central_moments: tuple[float, float, float]


def central_moments(g: Graph, gamma: float) -> tuple[float, float, float]:
    """(<DH^2>, <DH^3>, <DH^4>) of H_QW with respect to |+>, DH = H - <H>."""
    inv = invariants(g)
    k2, k3, k4 = inv.kappa2, inv.kappa3, inv.kappa4
    m2 = gamma**2 * k2
    m3 = 2.0 * gamma**2 * (2.0 * k2 + 3.0 * gamma * k3)
    m4 = gamma**2 * (-2.0 * k2 * (gamma**2 - 8.0) + 3.0 * gamma**2 * k2**2
                     + 24.0 * gamma * (2.0 * k3 + gamma * k4))
    return m2, m3, m4


def curvature(g: Graph, gamma: float) -> float:
    """<DH^4> - <DH^2>^2, nonnegative by Cauchy-Schwarz."""
    inv = invariants(g)
    k2, k3, k4 = inv.kappa2, inv.kappa3, inv.kappa4
    return 2.0 * gamma**2 * (-k2 * (gamma**2 - 8.0) + gamma**2 * k2**2
                             + 12.0 * gamma * (2.0 * k3 + gamma * k4))


def torsion(g: Graph, gamma: float) -> float:
    """Deviation measure from the two-dimensional subspace (zero for K_2 and C_3)."""
    inv = invariants(g)
    k2, k3, k4 = inv.kappa2, inv.kappa3, inv.kappa4
    if k2 == 0:
        raise ShortTimeError("torsion undefined for an empty edge set")
    return 2.0 * gamma**4 * (k2 * (k2 - 1.0) - 18.0 * k3**2 / k2 + 12.0 * k4)


def omega_squared(g: Graph, gamma: float) -> float:
    inv = invariants(g)
    k2, k3 = inv.kappa2, inv.kappa3
    if k2 == 0:
        raise ShortTimeError("two-level frequency undefined for an empty edge set")
    return gamma**2 * k2 + (2.0 * k2 + 3.0 * gamma * k3) ** 2 / k2**2


def analyze(g: Graph, gamma: float) -> ShortTimeAnalysis:
    tor = torsion(g, gamma)
    if tor < -1e-9:
        raise ShortTimeError(f"torsion {tor} violates the Cauchy-Schwarz bound")
    tor = max(tor, 0.0)
    horizon = np.inf if tor == 0.0 else tor ** (-0.25)
    return ShortTimeAnalysis(
        curvature=curvature(g, gamma), torsion=tor,
        omega2=omega_squared(g, gamma), horizon=float(horizon),
        graph_horizon=float(g.n * horizon),
        central_moments=central_moments(g, gamma))


def two_level_prediction(g: Graph, gamma: float,
                         times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form short-time series: hp_2d(t) and the leakage estimate eps_2d(t).

    hp_2d(t) = -4 kappa2 gamma sin^2(omega t) / omega^2 with
    omega^2 = gamma^2 kappa2 + (2 kappa2 + 3 gamma kappa3)^2 / kappa2^2.
    """
    if gamma <= 0:
        raise ShortTimeError(f"two-level prediction needs gamma > 0, got {gamma}")
    times = np.asarray(times, dtype=float)
    w2 = omega_squared(g, gamma)
    omega = np.sqrt(w2)
    hp_2d = -4.0 * invariants(g).kappa2 * gamma * np.sin(omega * times) ** 2 / w2
    eps_2d = max(torsion(g, gamma), 0.0) * times**4
    return hp_2d, eps_2d
