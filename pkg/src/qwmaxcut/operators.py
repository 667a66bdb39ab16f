"""Dense walk Hamiltonians, the spin-flip symmetry, and spectral decompositions.

Basis convention: computational basis states are ordered by integer value,
qubit 0 is the least significant bit, and Z|0> = +|0>. The driver is
H_d = -sum_i X_i, the problem term H_p = sum_{(i,j) in E} Z_i Z_j is diagonal,
and the walk Hamiltonian is H_QW = H_d + gamma * H_p.

Every walk Hamiltonian commutes with the spin-flip operator G = prod_i X_i,
which maps |b> to its bitwise complement. The +1 eigenspace of G is spanned by
(|b> + |b_comp>)/sqrt(2) over representatives b < b_comp; since the complement
flips the top bit, the representatives are exactly b in [0, 2^(n-1)). The
uniform superposition |+> reduces to the uniform vector of that sector.
Dynamics started in |+> stay in the sector, which halves every dense
dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, CapacityError

MAX_QUBITS_DENSE = 14          # full-sector dense operators: 2^14 x 2^14 ceiling
MAX_DIAG_DIM = 1 << 15         # diagonalize() refuses larger matrices
HERMITICITY_TOL = 1e-12
COMMUTATOR_TOL = 1e-12

_POPCOUNT16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)


class OperatorError(ValueError):
    """Operator construction or validation failure."""


class SymmetryError(OperatorError):
    """Operator does not commute with the spin-flip symmetry."""


@dataclass(frozen=True, eq=False)
class WalkOperator:
    """A Hermitian operator together with its sector tag and build parameters.

    ``sector`` is "full" (dimension 2^n), "spinflip_plus" or "spinflip_minus"
    (dimension 2^(n-1)). ``graph`` is retained so downstream code can rebuild
    observables such as the problem diagonal.
    """

    n: int
    gamma: float
    matrix: np.ndarray
    sector: str = "full"
    graph: Graph | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigen-decomposition with eigenvalues grouped by numerical degeneracy.

    ``energies`` ascend, ``states[:, k]`` is the eigenvector of energies[k],
    and ``degeneracy_groups`` partitions indices so that consecutive gaps
    within a group are at most ``tol_deg``.
    """

    energies: np.ndarray
    states: np.ndarray
    degeneracy_groups: tuple[np.ndarray, ...]
    tol_deg: float

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])


def _check_qubits(n: int):
    if n < 1:
        raise OperatorError(f"need n >= 1 qubits, got {n}")
    if n > MAX_QUBITS_DENSE:
        raise CapacityError(
            f"dense operators capped at n={MAX_QUBITS_DENSE} qubits, got {n}")


def problem_diagonal(g: Graph) -> np.ndarray:
    """Diagonal of H_p over the full computational basis, as float64."""
    _check_qubits(g.n)
    states = np.arange(1 << g.n, dtype=np.int64)
    diag = np.zeros(states.shape[0], dtype=np.float64)
    for i, j in g.edges:
        diag += 1.0 - 2.0 * (((states >> i) ^ (states >> j)) & 1)
    return diag


def build_problem(g: Graph) -> WalkOperator:
    """H_p = sum_{(i,j) in E} Z_i Z_j as a dense diagonal operator."""
    return WalkOperator(n=g.n, gamma=0.0, matrix=np.diag(problem_diagonal(g)),
                        sector="full", graph=g)


def build_driver(n: int) -> WalkOperator:
    """H_d = -sum_i X_i; ground state |+> with energy -n."""
    _check_qubits(n)
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=np.float64)
    rows = np.arange(dim)
    for i in range(n):
        m[rows, rows ^ (1 << i)] = -1.0
    return WalkOperator(n=n, gamma=0.0, matrix=m, sector="full")


def build_walk(g: Graph, gamma: float) -> WalkOperator:
    """H_QW = H_d + gamma * H_p (traceless, commutes with the spin flip)."""
    if not np.isfinite(gamma):
        raise OperatorError(f"gamma must be finite, got {gamma}")
    m = build_driver(g.n).matrix
    m[np.diag_indices_from(m)] = gamma * problem_diagonal(g)
    return WalkOperator(n=g.n, gamma=float(gamma), matrix=m, sector="full", graph=g)


def spin_flip(n: int) -> np.ndarray:
    """G = prod_i X_i: maps |b> to its complement, i.e. the anti-diagonal identity."""
    _check_qubits(n)
    return np.eye(1 << n)[::-1].copy()


def spin_flip_commutator_norm(matrix: np.ndarray) -> float:
    """Max-norm of [M, G] without forming G: (MG)[i,j]=M[i,rev j], (GM)=M[rev i,j]."""
    return float(np.abs(matrix[:, ::-1] - matrix[::-1, :]).max())


def uniform_plus_state(n: int, sector: str = "full") -> np.ndarray:
    """|+> = H^{(x)n}|0...0> in the requested sector."""
    if sector == "full":
        dim = 1 << n
    elif sector == "spinflip_plus":
        dim = 1 << (n - 1)
    else:
        raise OperatorError(f"|+> has no support in sector {sector!r}")
    return np.full(dim, 1.0 / np.sqrt(dim))


def _reduce(matrix: np.ndarray, sign: int) -> np.ndarray:
    half = matrix.shape[0] // 2
    # (|b> +/- |comp b>)/sqrt(2) basis; comp(b) = mask - b reverses the index.
    return matrix[:half, :half] + sign * matrix[:half, half:][:, ::-1]

def reduce_to_plus_sector(op: WalkOperator) -> WalkOperator:
    """Restrict a full-sector operator to the +1 eigenspace of the spin flip.

    The reduced basis is (|b> + |b_comp>)/sqrt(2) over representatives
    b in [0, 2^(n-1)); |+> maps to the uniform reduced vector.
    """
    return _reduce_to_sector(op, +1)


def reduce_to_minus_sector(op: WalkOperator) -> WalkOperator:
    """Restriction to the -1 eigenspace, basis (|b> - |b_comp>)/sqrt(2)."""
    return _reduce_to_sector(op, -1)


def _reduce_to_sector(op: WalkOperator, sign: int) -> WalkOperator:
    if op.sector != "full":
        raise OperatorError(f"can only reduce full-sector operators, got {op.sector!r}")
    scale = max(1.0, float(np.abs(op.matrix).max()))
    comm = spin_flip_commutator_norm(op.matrix)
    if comm > COMMUTATOR_TOL * scale:
        raise SymmetryError(
            f"[H, G] nonzero (max element {comm:.3e}); cannot reduce")
    tag = "spinflip_plus" if sign > 0 else "spinflip_minus"
    return WalkOperator(n=op.n, gamma=op.gamma, matrix=_reduce(op.matrix, sign),
                        sector=tag, graph=op.graph)


def _hamming_table(half: int) -> np.ndarray:
    reps = np.arange(half, dtype=np.int64)
    x = reps[:, None] ^ reps[None, :]
    if half > (1 << 16):
        raise CapacityError("sector dimension exceeds the popcount table")
    return _POPCOUNT16[x]


def sector_walk(g: Graph, gamma: float, sector: str = "spinflip_plus") -> WalkOperator:
    """Build the reduced walk Hamiltonian directly, without the 2^n matrix.

    Matrix elements follow from the pair basis: the driver couples
    representatives at Hamming distance 1 or n-1 (the complement route), with
    relative sign +1 in the plus sector and -1 in the minus sector; the
    problem diagonal restricts to the representatives unchanged. Agrees with
    reduce_to_*_sector(build_walk(g, gamma)) to machine precision.
    """
    if sector not in ("spinflip_plus", "spinflip_minus"):
        raise OperatorError(f"unknown sector {sector!r}")
    _check_qubits(g.n)
    if g.n == 1:
        m = np.array([[-1.0 if sector == "spinflip_plus" else 1.0]])
        return WalkOperator(n=1, gamma=float(gamma), matrix=m, sector=sector, graph=g)
    half = 1 << (g.n - 1)
    sign = 1.0 if sector == "spinflip_plus" else -1.0
    h = _hamming_table(half)
    m = -(h == 1).astype(np.float64)
    if g.n - 1 == 1:
        m *= 1.0 + sign
    else:
        m -= sign * (h == g.n - 1)
    diag = problem_diagonal(g)[:half]
    m[np.diag_indices(half)] += gamma * diag
    return WalkOperator(n=g.n, gamma=float(gamma), matrix=m, sector=sector, graph=g)


def degeneracy_tolerance(energies: np.ndarray) -> float:
    """Default grouping threshold: 1e-9 of the spectral radius (floor 1e-9)."""
    return 1e-9 * max(1.0, float(np.abs(energies).max()))


def group_degenerate(energies: np.ndarray, tol_deg: float) -> tuple[np.ndarray, ...]:
    """Partition ascending eigenvalues into runs with consecutive gaps <= tol."""
    if energies.shape[0] == 0:
        return ()
    breaks = np.nonzero(np.diff(energies) > tol_deg)[0] + 1
    return tuple(np.split(np.arange(energies.shape[0]), breaks))


def diagonalize(op: WalkOperator, tol_deg: float | None = None) -> SpectralDecomposition:
    """Full dense eigendecomposition with degeneracy grouping.

    ``tol_deg`` defaults to 1e-9 of the spectral radius; the paper's exact
    E_m = E_n condition is meaningless in floating point.
    """
    m = op.matrix
    if m.shape[0] > MAX_DIAG_DIM:
        raise CapacityError(f"diagonalize capped at dimension {MAX_DIAG_DIM}")
    scale = max(1.0, float(np.abs(m).max()))
    if float(np.abs(m - m.conj().T).max()) > HERMITICITY_TOL * scale:
        raise OperatorError("matrix is not Hermitian")
    energies, states = np.linalg.eigh(m)
    if tol_deg is None:
        tol_deg = degeneracy_tolerance(energies)
    groups = group_degenerate(energies, tol_deg)
    return SpectralDecomposition(energies=energies, states=states,
                                 degeneracy_groups=groups, tol_deg=tol_deg)
