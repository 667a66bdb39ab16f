"""Schrodinger dynamics of a constant walk Hamiltonian and its observables.

Propagation goes through the full eigendecomposition: one diagonalization
serves every requested time and also feeds the infinite-time average
(the degenerate-pair sum). States evolved from |+> stay in the spin-flip-even
sector, so the heavy linear algebra can run in the reduced basis; observables
are always evaluated on the expanded 2^n state vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph
from .operators import (SpectralDecomposition, WalkOperator, diagonalize,
                        problem_diagonal, sector_walk, uniform_plus_state)

_TIME_CHUNK = 512


class DynamicsError(ValueError):
    pass


def default_time_grid(t_max: float = 100.0, samples: int = 2000) -> np.ndarray:
    return np.linspace(0.0, t_max, samples)


@dataclass
class Trajectory:
    """Sampled evolution: times, named observable series, optional states.

    ``observables`` always holds "norm", "hd" and "hqw"; "hp" when a problem
    graph is attached; "p_ground" and "entropy" on request. ``states`` (full
    2^n vectors, one column per sample) are kept only when asked for.
    """

    times: np.ndarray
    observables: dict[str, np.ndarray]
    n: int
    gamma: float
    sector: str
    states: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def expand_plus_state(psi_red: np.ndarray) -> np.ndarray:
    """Lift a spin-flip-even reduced state to the full basis."""
    half = psi_red.shape[0]
    full = np.empty(2 * half, dtype=psi_red.dtype)
    full[:half] = psi_red
    full[half:] = psi_red[::-1]
    return full / np.sqrt(2.0)


def restrict_plus_state(psi_full: np.ndarray) -> np.ndarray:
    """Project a (spin-flip-even) full state onto the reduced basis."""
    half = psi_full.shape[0] // 2
    return (psi_full[:half] + psi_full[half:][::-1]) / np.sqrt(2.0)


def _flip_index_table(n: int) -> list[np.ndarray]:
    rows = np.arange(1 << n)
    return [rows ^ (1 << i) for i in range(n)]


def driver_expectation(states_full: np.ndarray, n: int) -> np.ndarray:
    """<H_d> per column, via the n bit-flip couplings (no dense matrix)."""
    out = np.zeros(states_full.shape[1])
    conj = states_full.conj()
    for idx in _flip_index_table(n):
        out -= np.einsum("bt,bt->t", conj, states_full[idx]).real
    return out


def ground_manifold(g: Graph) -> tuple[float, np.ndarray]:
    """Ground energy of H_p and all computational states attaining it."""
    d = problem_diagonal(g)
    e0 = d.min()
    return float(e0), np.nonzero(d == e0)[0]


def evolve(op: WalkOperator, psi0: np.ndarray, times: np.ndarray,
           spec: SpectralDecomposition | None = None,
           p_ground: bool = False,
           entropy_subset: tuple[int, ...] | None = None,
           store_states: bool = False) -> Trajectory:
    """Propagate psi0 under exp(-i H t) and sample the standard observables.

    psi(t) = sum_k exp(-i E_k t) <E_k|psi0> |E_k>, exact up to the
    diagonalization error. psi0 must be normalized and live in the same
    sector as ``op``.
    """
    times = np.asarray(times, dtype=float)
    psi0 = np.asarray(psi0)
    if spec is None:
        spec = diagonalize(op)
    if psi0.shape[0] != spec.dim:
        raise DynamicsError(
            f"state dimension {psi0.shape[0]} != operator dimension {spec.dim}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-8:
        raise DynamicsError("initial state is not normalized")

    n = op.n
    g = op.graph
    reduced = op.sector != "full"
    if op.sector == "spinflip_minus":
        raise DynamicsError("observable expansion implemented for the even sector only")
    hp_diag = problem_diagonal(g) if g is not None else None
    if p_ground and g is None:
        raise DynamicsError("p_ground requires an operator built from a graph")
    manifold = ground_manifold(g)[1] if p_ground else None

    amp0 = spec.states.conj().T @ psi0
    dim_full = 1 << n
    nt = times.shape[0]
    obs: dict[str, np.ndarray] = {"norm": np.empty(nt), "hd": np.empty(nt),
                                  "hqw": np.empty(nt)}
    if hp_diag is not None:
        obs["hp"] = np.empty(nt)
    if manifold is not None:
        obs["p_ground"] = np.empty(nt)
    if entropy_subset is not None:
        obs["entropy"] = np.empty(nt)
    stored = np.empty((dim_full, nt), dtype=np.complex128) if store_states else None

    for start in range(0, nt, _TIME_CHUNK):
        sl = slice(start, min(start + _TIME_CHUNK, nt))
        phases = np.exp(np.outer(spec.energies, -1j * times[sl]))
        block = spec.states @ (amp0[:, None] * phases)
        if reduced:
            full = np.empty((dim_full, block.shape[1]), dtype=np.complex128)
            half = dim_full // 2
            full[:half] = block
            full[half:] = block[::-1]
            full /= np.sqrt(2.0)
        else:
            full = block.astype(np.complex128, copy=False)
        prob = np.abs(full) ** 2
        obs["norm"][sl] = prob.sum(axis=0)
        obs["hd"][sl] = driver_expectation(full, n)
        if hp_diag is not None:
            obs["hp"][sl] = hp_diag @ prob
            obs["hqw"][sl] = obs["hd"][sl] + op.gamma * obs["hp"][sl]
        else:
            obs["hqw"][sl] = obs["hd"][sl]
        if manifold is not None:
            obs["p_ground"][sl] = prob[manifold].sum(axis=0)
        if entropy_subset is not None:
            col = np.empty(full.shape[1])
            for k in range(full.shape[1]):
                col[k] = entanglement_entropy(full[:, k], entropy_subset)
            obs["entropy"][sl] = col
        if stored is not None:
            stored[:, sl] = full

    return Trajectory(times=times, observables=obs, n=n, gamma=op.gamma,
                      sector=op.sector, states=stored,
                      meta={"entropy_subset": entropy_subset})


def time_average_hp(spec: SpectralDecomposition, psi0: np.ndarray,
                    observable: np.ndarray) -> float:
    """Infinite-time average of an observable: the degenerate-pair sum.

    Computes sum over eigenvalue groups of <u_g|O|u_g> with
    u_g = sum_{k in g} <E_k|psi0> |E_k>, which reduces to
    sum_k |<E_k|psi0>|^2 <E_k|O|E_k> when the spectrum is nondegenerate.
    ``observable`` is either the diagonal of O (1-d) or a dense matrix.
    """
    a = spec.states.conj().T @ np.asarray(psi0)
    observable = np.asarray(observable)
    diag_form = observable.ndim == 1
    singles = [grp[0] for grp in spec.degeneracy_groups if grp.shape[0] == 1]
    total = 0.0 + 0.0j
    if singles:
        vs = spec.states[:, singles]
        if diag_form:
            dk = np.einsum("b,bk,bk->k", observable, vs.conj(), vs)
        else:
            dk = np.einsum("bk,bc,ck->k", vs.conj(), observable, vs)
        total += np.abs(a[singles]) ** 2 @ dk
    for grp in spec.degeneracy_groups:
        if grp.shape[0] == 1:
            continue
        u = spec.states[:, grp] @ a[grp]
        if diag_form:
            total += np.vdot(u, observable * u)
        else:
            total += np.vdot(u, observable @ u)
    if abs(total.imag) > 1e-9:
        raise DynamicsError(f"time average has imaginary residue {total.imag:.3e}")
    return float(total.real)


def steady_state_hp(g: Graph, gamma: float,
                    spec: SpectralDecomposition | None = None,
                    sector: str = "spinflip_plus") -> float:
    """<H_p-bar> for the walk started in |+>, in the given (default reduced) sector."""
    if spec is None:
        if sector == "spinflip_plus":
            op = sector_walk(g, gamma)
        else:
            from .operators import build_walk
            op = build_walk(g, gamma)
        spec = diagonalize(op)
    d = problem_diagonal(g)[: spec.dim]
    return time_average_hp(spec, uniform_plus_state(g.n, sector), d)


def ground_state_probability(traj: Trajectory, manifold: np.ndarray) -> np.ndarray:
    """P(t) = sum over the ground manifold of |<b|psi(t)>|^2."""
    if "p_ground" in traj.observables:
        return traj.observables["p_ground"]
    if traj.states is None:
        raise DynamicsError("trajectory has neither stored states nor p_ground")
    return (np.abs(traj.states[manifold]) ** 2).sum(axis=0)


def random_half_subset(n: int, seed: int) -> tuple[int, ...]:
    """Seeded uniform choice of floor(n/2) qubits to keep for the reduced state."""
    rng = np.random.default_rng(seed)
    return tuple(sorted(rng.choice(n, size=n // 2, replace=False).tolist()))


def entanglement_entropy(psi: np.ndarray, subset) -> float:
    """Von Neumann entropy (nats) of the reduced state on ``subset`` qubits.

    The reduced density matrix never has to be formed: the singular values of
    the subset/rest reshaping give its eigenvalues directly. Eigenvalues are
    clamped at zero and 0*ln(0) is taken as 0.
    """
    subset = tuple(sorted(subset))
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if len(subset) != n // 2:
        raise DynamicsError(
            f"subset size {len(subset)} != floor(n/2) = {n // 2}")
    if len(set(subset)) != len(subset) or subset[0] < 0 or subset[-1] >= n:
        raise DynamicsError(f"bad qubit subset {subset}")
    # axis k of the reshaped tensor is qubit n-1-k
    tensor = psi.reshape((2,) * n)
    front = [n - 1 - q for q in subset]
    rest = [ax for ax in range(n) if ax not in front]
    mat = tensor.transpose(front + rest).reshape(1 << len(subset), -1)
    p = np.linalg.svd(mat, compute_uv=False) ** 2
    p = np.clip(p, 0.0, None)
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


def z_expectations(states_full: np.ndarray, n: int) -> np.ndarray:
    """<Z_i(t)> for every qubit: zero at all times under spin-flip symmetry."""
    b = np.arange(1 << n)
    ztab = 1.0 - 2.0 * (((b[None, :] >> np.arange(n)[:, None])) & 1)
    return ztab @ (np.abs(states_full) ** 2)


def conservation_report(traj: Trajectory) -> dict[str, float]:
    """Max drifts of the conserved quantities along the trajectory."""
    hqw = traj.observables["hqw"]
    return {
        "norm_drift": float(np.abs(traj.observables["norm"] - 1.0).max()),
        "hqw_drift": float(np.abs(hqw - hqw[0]).max()),
    }
