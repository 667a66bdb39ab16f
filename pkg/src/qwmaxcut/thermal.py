"""Thermalization machinery: Gibbs predictions, density-of-states models, gamma choice.

The walk conserves energy at <H_QW> = -n, so the matching Gibbs state is the
one whose mean energy equals -n; that single constraint fixes the inverse
temperature beta. Solving it exactly needs the full spectrum; the analytic
route instead models the density of states, either as a Gaussian (variance
n + gamma^2 kappa2) or as an exponentially modified Gaussian whose skew
parameter encodes the triangle count. Both models yield closed forms for
beta, the entropy, and the steady-state <H_p-bar>, and the latter gives a
cheap optimizer for gamma.

Densities are normalized to one and the state count enters as an additive
n*ln(2) in the total log-partition, which keeps the entropy formulas in their
printed form. Boltzmann weights are always evaluated relative to the ground
energy so large beta cannot overflow.

The walks studied here land at high temperatures (beta typically well below
one). Note that Gibbs states of local Hamiltonians at beta of order 0.1 and
below sit in classically simulable territory, so a walk hoping for quantum
advantage has to operate above that regime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx

from .dynamics import steady_state_hp
from .graphs import Graph, invariants
from .operators import (SpectralDecomposition, diagonalize, problem_diagonal,
                        sector_walk)

GAMMA_GRID_DEFAULT = (0.05, 3.0, 0.05)   # (lo, hi, step) for brute selection
GOLDEN_TOL = 1e-4


class ThermalError(ValueError):
    pass


class NoSolutionError(ThermalError):
    """The energy constraint has no positive-temperature solution."""


class ModelInfeasibleError(ThermalError):
    """The analytic DOS model cannot represent this graph/gamma combination."""


@dataclass(frozen=True)
class DosMoments:
    """Moments of the eigenvalue distribution of H_QW (closed forms)."""

    mu: float
    sigma2: float
    m3: float
    m4: float
    skewness: float
    excess_kurtosis: float


@dataclass(frozen=True)
class ThermalPrediction:
    beta: float
    hp: float
    entropy: float
    source: str   # "exact_gibbs" | "gaussian" | "emg"


def dos_moments(g: Graph, gamma: float) -> DosMoments:
    """Mean, variance, third/fourth moments, skewness and excess kurtosis."""
    inv = invariants(g)
    n, k2, k3, k4 = g.n, inv.kappa2, inv.kappa3, inv.kappa4
    sigma2 = n + gamma**2 * k2
    m3 = 6.0 * gamma**3 * k3
    m4 = (3.0 * n**2 - 2.0 * n + 4.0 * gamma**2 * n * k2
          + 2.0 * gamma**2 * (n - 4.0) * k2
          + gamma**4 * (k2 + 3.0 * k2 * (k2 - 1.0) + 24.0 * k4))
    skew = m3 / sigma2**1.5
    exk = -2.0 * (n + 4.0 * gamma**2 * k2 + gamma**4 * (k2 - 12.0 * k4)) / sigma2**2
    return DosMoments(mu=0.0, sigma2=sigma2, m3=m3, m4=m4,
                      skewness=skew, excess_kurtosis=exk)


@dataclass(frozen=True)
class DosModel:
    """Gaussian or exponentially-modified-Gaussian density of states.

    EMG parameters follow from moment matching: delta = gamma*(3 kappa3)^(1/3),
    m = -delta, nu^2 = sigma^2 - delta^2, lambda = 1/delta. delta = 0 is the
    Gaussian limit. log_partition refers to the unit-normalized density; the
    2^n state count adds n*ln(2) to the total.
    """

    kind: str
    n: int
    gamma: float
    sigma2: float
    delta: float
    kappa2: int
    kappa3: int

    @property
    def m(self) -> float:
        return -self.delta

    @property
    def nu2(self) -> float:
        return self.sigma2 - self.delta**2

    @property
    def lam(self) -> float:
        if self.delta == 0.0:
            raise ModelInfeasibleError("lambda undefined in the Gaussian limit")
        return 1.0 / self.delta

    def log_partition(self, beta: float) -> float:
        if self.delta == 0.0:
            return 0.5 * self.sigma2 * beta**2
        if 1.0 + beta * self.delta <= 0.0:
            raise ThermalError(f"beta={beta} outside the EMG domain")
        return (-np.log1p(beta * self.delta) + self.delta * beta
                + 0.5 * self.nu2 * beta**2)

    def log_partition_total(self, beta: float) -> float:
        return self.n * np.log(2.0) + self.log_partition(beta)

    def energy(self, beta: float) -> float:
        """Model mean energy -d(lnZ)/d(beta)."""
        if self.delta == 0.0:
            return -self.sigma2 * beta
        return self.delta / (1.0 + beta * self.delta) - self.delta - self.nu2 * beta

    def solve_beta(self, target_energy: float) -> float:
        """Positive-temperature root of energy(beta) = target."""
        if self.delta == 0.0:
            return -target_energy / self.sigma2
        a = self.nu2 * self.delta
        b = self.sigma2 + target_energy * self.delta
        disc = b * b - 4.0 * a * target_energy
        if disc < 0.0:
            raise ModelInfeasibleError(
                f"no real EMG temperature for target energy {target_energy}")
        beta = (-b + np.sqrt(disc)) / (2.0 * a)
        if 1.0 + beta * self.delta <= 0.0:
            raise ModelInfeasibleError("EMG root escapes the partition domain")
        return float(beta)

    def hp_prediction(self, beta: float) -> float:
        """Steady-state <H_p-bar> = -(1/beta) d(lnZ)/d(gamma) at fixed beta.

        The gamma dependence enters through sigma^2 and delta with
        d(sigma^2)/d(gamma) = 2 gamma kappa2, d(delta)/d(gamma) = (3 kappa3)^(1/3).
        """
        if self.delta == 0.0:
            return -beta * self.gamma * self.kappa2
        dprime = (3.0 * self.kappa3) ** (1.0 / 3.0)
        return (dprime / (1.0 + beta * self.delta) - dprime
                - beta * (self.gamma * self.kappa2 - self.delta * dprime))

    def entropy(self, beta: float) -> float:
        """Thermodynamic entropy S = beta*<E> + ln(Z_total) at this beta."""
        return beta * self.energy(beta) + self.log_partition_total(beta)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        """Model density (normalized to one), numerically stable via erfcx."""
        x = np.asarray(x, dtype=float)
        if self.delta == 0.0:
            return np.exp(-x**2 / (2.0 * self.sigma2)) / np.sqrt(2.0 * np.pi * self.sigma2)
        lam, m, nu2 = self.lam, self.m, self.nu2
        u = (m + lam * nu2 - x) / np.sqrt(2.0 * nu2)
        return 0.5 * lam * erfcx(u) * np.exp(-(x - m) ** 2 / (2.0 * nu2))


def fit_gaussian(g: Graph, gamma: float) -> DosModel:
    inv = invariants(g)
    return DosModel(kind="gaussian", n=g.n, gamma=float(gamma),
                    sigma2=g.n + gamma**2 * inv.kappa2, delta=0.0,
                    kappa2=inv.kappa2, kappa3=inv.kappa3)


def fit_emg(moments: DosMoments, gamma: float, g: Graph) -> DosModel:
    """Moment-matched EMG model; silently degrades to Gaussian when kappa3 = 0."""
    inv = invariants(g)
    delta = gamma * (3.0 * inv.kappa3) ** (1.0 / 3.0)
    if delta == 0.0:
        return fit_gaussian(g, gamma)
    if moments.sigma2 <= delta**2:
        raise ModelInfeasibleError(
            f"EMG fit needs sigma^2 > delta^2, got {moments.sigma2} <= {delta**2}")
    return DosModel(kind="emg", n=g.n, gamma=float(gamma), sigma2=moments.sigma2,
                    delta=float(delta), kappa2=inv.kappa2, kappa3=inv.kappa3)


def fit_dos_model(g: Graph, gamma: float, kind: str = "emg") -> DosModel:
    if kind == "gaussian":
        return fit_gaussian(g, gamma)
    if kind == "emg":
        return fit_emg(dos_moments(g, gamma), gamma, g)
    raise ThermalError(f"unknown DOS model kind {kind!r}")


# --- exact Gibbs route -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class ThermalData:
    """Full walk spectrum (both spin-flip sectors) plus eigen-diagonal H_p."""

    n: int
    gamma: float
    energies: np.ndarray
    hp_eigen: np.ndarray | None


def walk_thermal_data(g: Graph, gamma: float, need_hp: bool = True,
                      plus_spec: SpectralDecomposition | None = None) -> ThermalData:
    """Assemble the full 2^n spectrum from the two sector diagonalizations.

    A precomputed even-sector decomposition can be passed in to avoid
    repeating the dominant eigh call.
    """
    half_diag = problem_diagonal(g)[: 1 << max(g.n - 1, 0)]
    pieces_e, pieces_d = [], []
    for sector in ("spinflip_plus", "spinflip_minus"):
        op = sector_walk(g, gamma, sector)
        if sector == "spinflip_plus" and plus_spec is not None:
            spec = plus_spec
        elif need_hp:
            spec = diagonalize(op)
        else:
            pieces_e.append(np.linalg.eigvalsh(op.matrix))
            continue
        pieces_e.append(spec.energies)
        if need_hp:
            pieces_d.append(np.einsum("b,bk,bk->k", half_diag,
                                      spec.states.conj(), spec.states).real)
    energies = np.concatenate(pieces_e)
    order = np.argsort(energies, kind="stable")
    hp_eigen = np.concatenate(pieces_d)[order] if need_hp else None
    return ThermalData(n=g.n, gamma=float(gamma), energies=energies[order],
                       hp_eigen=hp_eigen)


def gibbs_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    """Boltzmann weights exp(-beta(E - E0)) / Z, safe for any positive beta."""
    shifted = -beta * (energies - energies.min())
    w = np.exp(shifted)
    return w / w.sum()


def gibbs_energy(energies: np.ndarray, beta: float) -> float:
    return float(gibbs_weights(energies, beta) @ energies)


def gibbs_expectation(spec, observable, beta: float) -> float:
    """Tr[O rho_beta] from a decomposition; observable as matrix or diagonal.

    Accepts a SpectralDecomposition (observable given in the computational
    basis) or a ThermalData record (its stored eigen-diagonal is used when
    ``observable`` is None).
    """
    if not np.isfinite(beta):
        raise ThermalError(f"beta must be finite, got {beta}")
    if isinstance(spec, ThermalData):
        if observable is None:
            if spec.hp_eigen is None:
                raise ThermalError("ThermalData was built without H_p diagonals")
            diag = spec.hp_eigen
        else:
            raise ThermalError("pass observable=None when using ThermalData")
        return float(gibbs_weights(spec.energies, beta) @ diag)
    observable = np.asarray(observable)
    v = spec.states
    if observable.ndim == 1:
        diag = np.einsum("b,bk,bk->k", observable, v.conj(), v).real
    else:
        diag = np.einsum("bk,bc,ck->k", v.conj(), observable, v).real
    return float(gibbs_weights(spec.energies, beta) @ diag)


def solve_beta_exact(spec, target_energy: float,
                     rtol: float = 1e-8) -> float:
    """Unique beta with <H>_beta = target, by bisection on the monotone curve.

    d<E>/d(beta) = -Var_beta(H) < 0, so a sign change brackets the root. The
    target must lie strictly inside (E_ground, E_mean).
    """
    energies = np.asarray(spec.energies if hasattr(spec, "energies") else spec,
                          dtype=float)
    e0 = float(energies.min())
    mean = float(energies.mean())
    if not (e0 < target_energy < mean):
        raise NoSolutionError(
            f"target energy {target_energy} outside ({e0}, {mean}); "
            "no positive-temperature Gibbs state matches")
    tol = rtol * max(1.0, abs(target_energy))
    lo, hi = 0.0, 1.0
    while gibbs_energy(energies, hi) > target_energy:
        hi *= 2.0
        if hi > 1e9:
            raise NoSolutionError("failed to bracket the temperature")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        e_mid = gibbs_energy(energies, mid)
        if abs(e_mid - target_energy) <= tol:
            return mid
        if e_mid > target_energy:
            lo = mid
        else:
            hi = mid
    raise ThermalError("temperature bisection did not converge")


# --- analytic closed forms ---------------------------------------------------

def beta_gaussian(g: Graph, gamma: float) -> float:
    """Gaussian-DOS estimate beta_est = n / (n + gamma^2 kappa2)."""
    return g.n / (g.n + gamma**2 * invariants(g).kappa2)


def beta_emg(g: Graph, gamma: float) -> float:
    """EMG-DOS estimate; reduces to the Gaussian form when delta = 0.

    The closed form is the positive root of the model energy constraint; the
    residual of that constraint is asserted tiny as a self-check.
    """
    model = fit_dos_model(g, gamma, "emg")
    beta = model.solve_beta(-float(g.n))
    resid = model.energy(beta) + g.n
    if abs(resid) > 1e-8 * max(1.0, g.n):
        raise ThermalError(f"EMG beta closed form inconsistent (residual {resid:.2e})")
    return beta


def entropy_model(model: DosModel, beta: float, n: int) -> float:
    """S = beta <H_QW> + ln Z_total for the model at this beta."""
    if n != model.n:
        raise ThermalError(f"model built for n={model.n}, got n={n}")
    return model.entropy(beta)


def hp_model(model: DosModel, g: Graph, gamma: float) -> ThermalPrediction:
    """Model beta, <H_p-bar> and entropy at the walk's energy constraint."""
    if gamma != model.gamma:
        raise ThermalError("model was fitted at a different gamma")
    beta = model.solve_beta(-float(g.n))
    return ThermalPrediction(beta=float(beta), hp=float(model.hp_prediction(beta)),
                             entropy=float(model.entropy(beta)), source=model.kind)


# --- gamma selection ---------------------------------------------------------

def _golden_min(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    invphi = 0.5 * (np.sqrt(5.0) - 1.0)
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def gamma_heuristic(g: Graph) -> float:
    """Energy-scale matching gamma: gamma^2 kappa2 = n."""
    k2 = invariants(g).kappa2
    if k2 == 0:
        raise ThermalError("heuristic gamma undefined for an empty graph")
    return float(np.sqrt(g.n / k2))


def _emg_feasible_hi(g: Graph, hi: float) -> float:
    inv = invariants(g)
    slope = (3.0 * inv.kappa3) ** (2.0 / 3.0) - inv.kappa2
    if slope <= 0:
        return hi
    return min(hi, 0.999 * float(np.sqrt(g.n / slope)))


def gamma_select(g: Graph, strategy: str, grid: np.ndarray | None = None,
                 ) -> tuple[float, float]:
    """Choose gamma; returns (gamma, hp) with hp measured for "brute" and
    model-predicted for the analytic strategies.

    brute:        argmin over the grid of the measured steady-state average
                  (one reduced diagonalization per grid point).
    heuristic:    sqrt(n/kappa2), with the Gaussian-model value attached.
    gaussian_opt: the Gaussian model optimum, which equals the heuristic.
    emg_opt:      golden-section minimum of the EMG-model prediction.
    """
    if strategy == "brute":
        if grid is None:
            lo, hi, step = GAMMA_GRID_DEFAULT
            grid = np.arange(lo, hi + 0.5 * step, step)
        grid = np.asarray(grid, dtype=float)
        if grid.size == 0:
            raise ThermalError("empty gamma grid")
        values = [steady_state_hp(g, float(gam)) for gam in grid]
        k = int(np.argmin(values))
        return float(grid[k]), float(values[k])
    if strategy in ("heuristic", "gaussian_opt"):
        gam = gamma_heuristic(g)
        return gam, float(hp_model(fit_gaussian(g, gam), g, gam).hp)
    if strategy == "emg_opt":
        if invariants(g).kappa3 == 0:
            gam = gamma_heuristic(g)
            return gam, float(hp_model(fit_gaussian(g, gam), g, gam).hp)
        lo, hi, _ = GAMMA_GRID_DEFAULT
        hi = _emg_feasible_hi(g, hi)

        def objective(gam: float) -> float:
            return hp_model(fit_dos_model(g, gam, "emg"), g, gam).hp

        gam, hp = _golden_min(objective, lo, hi, GOLDEN_TOL)
        return float(gam), float(hp)
    raise ThermalError(f"unknown gamma strategy {strategy!r}")
