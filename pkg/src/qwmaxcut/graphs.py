"""MAX-CUT problem graphs and the subgraph counts behind the analytic formulas.

A graph is an immutable record: vertices 0..n-1, an edge list, the generation
seed and a family tag. The invariants kappa2/kappa3/kappa4 (edge, triangle and
4-cycle-subgraph counts) parameterize every closed-form prediction in the rest
of the package, so they are computed exactly in integer arithmetic and cached.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

DEFAULT_EDGE_PROBABILITY = 2.0 / 3.0

_REGULAR_RETRY_BUDGET = 10_000
_MAXCUT_MAX_QUBITS = 30
_MAXCUT_CHUNK = 1 << 20


class GraphError(ValueError):
    """Invalid graph parameters or a failed generation attempt."""


class CapacityError(GraphError):
    """Problem size exceeds the exhaustive-scan budget."""


@dataclass(frozen=True)
class Graph:
    """Unweighted simple graph on vertices 0..n-1.

    ``edges`` is a lexicographically sorted tuple of (i, j) pairs with i < j.
    ``family`` is a free-form tag such as "binomial(p=0.667)", "regular(d=3)"
    or "explicit"; ``seed`` is the 64-bit generation seed (0 for explicit
    graphs).
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    seed: int = 0
    family: str = "explicit"

    def __post_init__(self):
        if self.n < 1:
            raise GraphError(f"need at least one vertex, got n={self.n}")
        edges = tuple(sorted(tuple(sorted(e)) for e in self.edges))
        if len(set(edges)) != len(edges):
            raise GraphError("duplicate edges")
        for i, j in edges:
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge ({i},{j}) out of range for n={self.n}")
        object.__setattr__(self, "edges", edges)

    @property
    def kappa2(self) -> int:
        return len(self.edges)

    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return tuple(deg)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a


@dataclass(frozen=True)
class GraphInvariants:
    """Subgraph counts: kappa2 edges, kappa3 triangles, kappa4 4-cycle subgraphs."""

    kappa2: int
    kappa3: int
    kappa4: int
    degrees: tuple[int, ...]


def gen_binomial(n: int, p: float = DEFAULT_EDGE_PROBABILITY, seed: int = 0) -> Graph:
    """Erdos-Renyi graph: each of the n(n-1)/2 edges kept with probability p.

    Deterministic for a fixed seed. Disconnected outcomes are kept; MAX-CUT
    stays well defined and discarding them would bias ensemble statistics.
    """
    if n < 2:
        raise GraphError(f"binomial graph needs n >= 2, got {n}")
    if not (0.0 <= p <= 1.0):
        raise GraphError(f"edge probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    candidates = list(combinations(range(n), 2))
    keep = rng.random(len(candidates)) < p
    edges = tuple(e for e, k in zip(candidates, keep) if k)
    return Graph(n=n, edges=edges, seed=int(seed), family=f"binomial(p={p:g})")


def gen_regular(n: int, d: int, seed: int = 0) -> Graph:
    """Uniform-model random d-regular graph via stub pairing with full rejection.

    A pairing is drawn, and rejected outright if it contains a self-loop or a
    repeated edge (no edge-swap repair, which would skew the distribution).
    """
    if d >= n or d < 0:
        raise GraphError(f"regular degree must satisfy 0 <= d < n, got d={d}, n={n}")
    if (n * d) % 2 != 0:
        raise GraphError(f"n*d must be even, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(_REGULAR_RETRY_BUDGET):
        rng.shuffle(stubs)
        a = np.minimum(stubs[0::2], stubs[1::2])
        b = np.maximum(stubs[0::2], stubs[1::2])
        if np.any(a == b):
            continue
        pairs = set(zip(a.tolist(), b.tolist()))
        if len(pairs) != len(a):
            continue
        return Graph(n=n, edges=tuple(sorted(pairs)), seed=int(seed),
                     family=f"regular(d={d})")
    raise GraphError(
        f"regular graph generation failed after {_REGULAR_RETRY_BUDGET} pairings "
        f"(n={n}, d={d}, seed={seed})")


@lru_cache(maxsize=4096)
def invariants(g: Graph) -> GraphInvariants:
    """Exact kappa2/kappa3/kappa4 via integer adjacency-matrix traces.

    kappa3 = tr(A^3)/6; kappa4 counts distinct 4-cycle subgraphs (each cycle
    once) through tr(A^4) = 8*kappa4 + 2*sum(deg^2) - 2*kappa2.
    """
    a = g.adjacency()
    deg = np.asarray(g.degrees(), dtype=np.int64)
    a2 = a @ a
    tr3 = int(np.einsum("ij,ji->", a2, a))
    tr4 = int(np.einsum("ij,ij->", a2, a2))  # tr(A^4) = ||A^2||_F^2
    kappa3 = tr3 // 6
    kappa4 = (tr4 - 2 * int(np.sum(deg**2)) + 2 * g.kappa2) // 8
    return GraphInvariants(kappa2=g.kappa2, kappa3=kappa3, kappa4=kappa4,
                           degrees=tuple(int(x) for x in deg))


def max_cut_exact(g: Graph) -> tuple[int, int]:
    """Ground energy of sum_{(i,j) in E} z_i z_j and the optimal cut size.

    Exhaustive scan over spin assignments; the global spin flip halves the
    scan to 2^(n-1) states. Returns (E0, cut) with cut = (kappa2 - E0)/2.
    """
    if g.n > _MAXCUT_MAX_QUBITS:
        raise CapacityError(
            f"exhaustive MAX-CUT scan capped at n={_MAXCUT_MAX_QUBITS}, got {g.n}")
    if not g.edges:
        return 0, 0
    best = np.iinfo(np.int64).max
    half = 1 << (g.n - 1)
    for start in range(0, half, _MAXCUT_CHUNK):
        states = np.arange(start, min(start + _MAXCUT_CHUNK, half), dtype=np.int64)
        energy = np.zeros(len(states), dtype=np.int64)
        for i, j in g.edges:
            same = ((states >> i) ^ (states >> j)) & 1
            energy += 1 - 2 * same
        best = min(best, int(energy.min()))
    return best, (g.kappa2 - best) // 2


def is_connected(g: Graph) -> bool:
    """Breadth-first connectivity check (recorded in experiment metadata)."""
    if g.n == 1:
        return True
    adj = [[] for _ in range(g.n)]
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return len(seen) == g.n


def to_json(g: Graph) -> str:
    """Serialize to the canonical JSON form (bit-exact round trip)."""
    payload = {"n": g.n, "family": g.family, "seed": g.seed,
               "edges": [[i, j] for i, j in g.edges]}
    return json.dumps(payload, separators=(", ", ": "))


def from_json(text: str) -> Graph:
    try:
        payload = json.loads(text)
        return Graph(n=int(payload["n"]), family=str(payload["family"]),
                     seed=int(payload["seed"]),
                     edges=tuple((int(i), int(j)) for i, j in payload["edges"]))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from exc


def ring(k: int) -> Graph:
    """The k-cycle C_k (k >= 3)."""
    if k < 3:
        raise GraphError("a ring needs at least 3 vertices")
    edges = tuple((i, i + 1) for i in range(k - 1)) + ((0, k - 1),)
    return Graph(n=k, edges=edges, family="explicit")


def complete(k: int) -> Graph:
    """The complete graph K_k."""
    return Graph(n=k, edges=tuple(combinations(range(k), 2)), family="explicit")
