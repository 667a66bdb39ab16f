"""Shared fixtures and independent oracles.

Oracles here never reuse the package's bit-twiddling constructions: operators
are built by explicit Kronecker products, subgraph counts by combinatorial
enumeration, and ground states by scanning every spin assignment, so each
test compares two genuinely different routes to the same number.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from qwmaxcut.graphs import Graph, gen_binomial, gen_regular, ring, complete

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def kron_site(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Embed a single-qubit operator at ``site`` (qubit 0 = least significant)."""
    out = np.array([[1.0]])
    for q in range(n - 1, -1, -1):
        out = np.kron(out, op if q == site else I2)
    return out


def pauli_hp(g: Graph) -> np.ndarray:
    dim = 1 << g.n
    out = np.zeros((dim, dim))
    for i, j in g.edges:
        out += kron_site(Z, i, g.n) @ kron_site(Z, j, g.n)
    return out


def pauli_hd(n: int) -> np.ndarray:
    return -sum(kron_site(X, i, n) for i in range(n))


def pauli_walk(g: Graph, gamma: float) -> np.ndarray:
    return pauli_hd(g.n) + gamma * pauli_hp(g)


def pauli_spin_flip(n: int) -> np.ndarray:
    out = np.eye(1)
    for _ in range(n):
        out = np.kron(out, X)
    return out


def brute_max_cut(g: Graph) -> tuple[int, int]:
    """Scan all 2^n assignments with plain integer arithmetic."""
    best = None
    for state in range(1 << g.n):
        z = [1 - 2 * ((state >> i) & 1) for i in range(g.n)]
        energy = sum(z[i] * z[j] for i, j in g.edges)
        best = energy if best is None else min(best, energy)
    return best, (len(g.edges) - best) // 2


def count_triangles_comb(g: Graph) -> int:
    edges = set(g.edges)
    return sum((a, b) in edges and (b, c) in edges and (a, c) in edges
               for a, b, c in combinations(range(g.n), 3))


def count_four_cycles_comb(g: Graph) -> int:
    """Distinct 4-cycle subgraphs: three cyclic orders per vertex quadruple."""
    edges = set(g.edges)

    def has(a, b):
        return (min(a, b), max(a, b)) in edges

    total = 0
    for a, b, c, d in combinations(range(g.n), 4):
        for p, q, r, s in ((a, b, c, d), (a, b, d, c), (a, c, b, d)):
            total += has(p, q) and has(q, r) and has(r, s) and has(s, p)
    return total


def mixed_graph_pool(count: int, seed: int = 2024) -> list[Graph]:
    """Nonempty test graphs up to n = 8: binomial, regular, and named ones."""
    rng = np.random.default_rng(seed)
    pool = [Graph(n=2, edges=((0, 1),)), ring(3), ring(4), complete(4), ring(6)]
    k = 0
    while len(pool) < count:
        k += 1
        if k % 4 == 0:
            n = int(rng.choice([6, 8]))
            g = gen_regular(n, int(rng.choice([2, 3])), seed=int(rng.integers(2**32)))
        else:
            n = int(rng.integers(4, 9))
            g = gen_binomial(n, float(rng.choice([0.3, 2 / 3, 0.9])),
                             seed=int(rng.integers(2**32)))
        if g.kappa2 > 0:
            pool.append(g)
    return pool[:count]


@pytest.fixture(scope="session")
def graph_pool_50():
    return mixed_graph_pool(50)


@pytest.fixture
def single_edge():
    return Graph(n=2, edges=((0, 1),))


@pytest.fixture
def c3():
    return ring(3)


@pytest.fixture
def c4():
    return ring(4)


@pytest.fixture
def k4():
    return complete(4)
