import numpy as np
import pytest
from numpy.testing import assert_allclose

from qwmaxcut.graphs import Graph, gen_binomial, ring
from qwmaxcut.operators import (OperatorError, SymmetryError, build_driver,
                                build_problem, build_walk, diagonalize,
                                reduce_to_minus_sector,
                                reduce_to_plus_sector, sector_walk, spin_flip,
                                spin_flip_commutator_norm, uniform_plus_state)
from qwmaxcut.thermal import dos_moments

from conftest import pauli_hd, pauli_hp, pauli_spin_flip, pauli_walk


def test_problem_operator(single_edge, c3):
    assert_allclose(build_problem(single_edge).matrix,
                    np.diag([1.0, -1.0, -1.0, 1.0]))
    assert not build_problem(Graph(n=3, edges=())).matrix.any()
    spectrum = np.sort(np.diag(build_problem(c3).matrix))
    assert_allclose(spectrum, [-1.0] * 6 + [3.0] * 2)


def test_problem_matches_kron_oracle():
    for seed in range(5):
        g = gen_binomial(6, 0.5, seed=seed)
        assert_allclose(build_problem(g).matrix, pauli_hp(g), atol=0)


def test_driver():
    assert_allclose(np.linalg.eigvalsh(build_driver(1).matrix), [-1.0, 1.0])
    evals = np.linalg.eigvalsh(build_driver(3).matrix)
    assert_allclose(evals[0], -3.0)
    assert evals[1] > -3.0 + 1e-9
    for n in (2, 4, 6):
        m = build_driver(n).matrix
        assert_allclose(m, pauli_hd(n), atol=0)
        plus = uniform_plus_state(n)
        assert_allclose(plus @ m @ plus, -n, atol=1e-12)


def test_walk_operator(single_edge):
    g = gen_binomial(7, 2 / 3, seed=11)
    for gamma in (0.0, 0.4, 1.7):
        m = build_walk(g, gamma).matrix
        assert_allclose(m, pauli_walk(g, gamma), atol=0)
        assert abs(np.trace(m)) == 0.0
    assert_allclose(build_walk(g, 0.0).matrix, build_driver(7).matrix, atol=0)
    m = build_walk(single_edge, 1.0).matrix
    assert_allclose(np.sum(m * m) / 4.0, 3.0)   # n + gamma^2 kappa2
    with pytest.raises(OperatorError):
        build_walk(g, float("inf"))


def test_spin_flip_symmetry():
    assert_allclose(spin_flip(1), np.array([[0.0, 1.0], [1.0, 0.0]]))
    for n in (2, 3, 5):
        assert_allclose(spin_flip(n), pauli_spin_flip(n), atol=0)
    for seed in range(4):
        g = gen_binomial(6, 0.6, seed=seed)
        m = build_walk(g, 0.9).matrix
        gmat = spin_flip(6)
        assert np.abs(m @ gmat - gmat @ m).max() <= 1e-12
        assert spin_flip_commutator_norm(m) <= 1e-12


def test_plus_sector_reduction(single_edge):
    op = build_walk(single_edge, 1.0)
    red = reduce_to_plus_sector(op)
    assert red.matrix.shape == (2, 2)
    evals = np.linalg.eigvalsh(red.matrix)
    assert_allclose(evals, [-np.sqrt(5.0), np.sqrt(5.0)], atol=1e-12)
    # the G=+1 eigenvalues of the full operator, found independently
    full_vals, full_vecs = np.linalg.eigh(op.matrix)
    gdiag = np.einsum("bk,bc,ck->k", full_vecs, pauli_spin_flip(2), full_vecs)
    assert_allclose(np.sort(full_vals[gdiag > 0.5]), evals, atol=1e-12)


def test_reduction_spectrum_submultiset():
    g = gen_binomial(6, 0.7, seed=3)
    op = build_walk(g, 1.2)
    full = np.linalg.eigvalsh(op.matrix)
    plus = np.linalg.eigvalsh(reduce_to_plus_sector(op).matrix)
    minus = np.linalg.eigvalsh(reduce_to_minus_sector(op).matrix)
    assert_allclose(np.sort(np.concatenate([plus, minus])), full, atol=1e-10)
    # reduced |+> is the uniform vector with norm 1
    plus_red = uniform_plus_state(6, "spinflip_plus")
    assert_allclose(plus_red, np.full(32, 1 / np.sqrt(32)))


def test_reduction_rejects_asymmetric():
    g = Graph(n=3, edges=((0, 1),))
    op = build_walk(g, 1.0)
    broken = type(op)(n=3, gamma=1.0,
                      matrix=op.matrix + np.diag(np.arange(8.0)), sector="full")
    with pytest.raises(SymmetryError):
        reduce_to_plus_sector(broken)


def test_sector_walk_matches_projection():
    for n, seed in ((2, 0), (4, 1), (6, 2), (8, 3)):
        g = gen_binomial(n, 0.6, seed=seed)
        op = build_walk(g, 0.8)
        assert_allclose(sector_walk(g, 0.8, "spinflip_plus").matrix,
                        reduce_to_plus_sector(op).matrix, atol=1e-12)
        assert_allclose(sector_walk(g, 0.8, "spinflip_minus").matrix,
                        reduce_to_minus_sector(op).matrix, atol=1e-12)


def test_diagonalize():
    spec = diagonalize(build_driver(2))
    assert_allclose(spec.energies, [-2.0, 0.0, 0.0, 2.0], atol=1e-12)
    spec4 = diagonalize(build_problem(ring(4)))
    sizes = sorted(len(grp) for grp in spec4.degeneracy_groups)
    assert sizes == [2, 2, 12]


def test_diagonalize_rejects_non_hermitian():
    from qwmaxcut.operators import WalkOperator
    bad = WalkOperator(n=1, gamma=0.0,
                       matrix=np.array([[0.0, 1.0], [0.0, 0.0]]), sector="full")
    with pytest.raises(OperatorError):
        diagonalize(bad)


def test_diagonalize_reconstruction():
    g = gen_binomial(10, 2 / 3, seed=4)
    op = build_walk(g, 1.0)
    spec = diagonalize(op)
    recon = (spec.states * spec.energies) @ spec.states.conj().T
    assert np.abs(recon - op.matrix).max() <= 1e-9
    ortho = spec.states.conj().T @ spec.states
    assert np.abs(ortho - np.eye(spec.dim)).max() <= 1e-10


def test_trace_moments_closed_forms(graph_pool_50):
    # Tr H^k / 2^n for k <= 4 against the moment closed forms
    for idx, g in enumerate(graph_pool_50[:10]):
        gamma = (0.3, 0.8, 1.5)[idx % 3]
        m = build_walk(g, gamma).matrix
        dim = m.shape[0]
        b = m @ m
        mom = dos_moments(g, gamma)
        assert abs(np.trace(m) / dim) <= 1e-12
        assert abs(np.sum(m * m) / dim - mom.sigma2) <= 1e-9
        assert abs(np.sum(b * m) / dim - mom.m3) <= 1e-9
        assert abs(np.sum(b * b) / dim - mom.m4) <= 1e-9


def test_plus_expectation_is_minus_n(graph_pool_50):
    for g in graph_pool_50[:8]:
        for gamma in (0.3, 1.1):
            plus = uniform_plus_state(g.n)
            assert abs(plus @ build_walk(g, gamma).matrix @ plus + g.n) <= 1e-10
