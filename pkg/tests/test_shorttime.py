import numpy as np
import pytest
from numpy.testing import assert_allclose

from qwmaxcut.dynamics import evolve
from qwmaxcut.graphs import Graph, gen_binomial, ring
from qwmaxcut.operators import sector_walk, uniform_plus_state
from qwmaxcut.shorttime import (ShortTimeError, analyze, central_moments,
                                curvature, omega_squared, torsion,
                                two_level_prediction)

from conftest import pauli_walk


def brute_central_moments(g, gamma):
    h = pauli_walk(g, gamma)
    dim = h.shape[0]
    plus = np.full(dim, dim**-0.5)
    hc = h - (plus @ h @ plus) * np.eye(dim)
    v2 = hc @ (hc @ plus)
    return (plus @ v2, plus @ (hc @ v2), plus @ (hc @ (hc @ v2)))


def test_single_edge_moments(single_edge):
    assert central_moments(single_edge, 1.0) == (1.0, 4.0, 17.0)
    assert central_moments(Graph(n=3, edges=()), 1.0) == (0.0, 0.0, 0.0)


def test_moments_match_brute_force(graph_pool_50):
    for idx, g in enumerate(graph_pool_50[:30]):
        gamma = (0.4, 0.9, 1.6)[idx % 3]
        got = central_moments(g, gamma)
        want = brute_central_moments(g, gamma)
        assert_allclose(got, want, atol=1e-9, rtol=1e-12)


def test_torsion_zeros(single_edge, c3):
    assert torsion(single_edge, 1.0) == 0.0
    assert torsion(c3, 0.7) == 0.0
    with pytest.raises(ShortTimeError):
        torsion(Graph(n=3, edges=()), 1.0)


def test_torsion_curvature_match_moment_forms(graph_pool_50):
    for idx, g in enumerate(graph_pool_50[:30]):
        gamma = (0.4, 0.9, 1.6)[idx % 3]
        m2, m3, m4 = brute_central_moments(g, gamma)
        assert abs(curvature(g, gamma) - (m4 - m2**2)) <= 1e-8
        assert abs(torsion(g, gamma) - (m4 - m2**2 - m3**2 / m2)) <= 1e-8
        assert curvature(g, gamma) >= 0.0
        assert torsion(g, gamma) >= -1e-9


def test_analyze_horizons(single_edge):
    ana = analyze(single_edge, 1.0)
    assert ana.torsion == 0.0 and np.isinf(ana.horizon)
    g = gen_binomial(8, 2 / 3, seed=3)
    ana = analyze(g, 0.5)
    assert ana.horizon == pytest.approx(ana.torsion ** -0.25)
    assert ana.graph_horizon == pytest.approx(8 * ana.horizon)


def test_two_level_series_form():
    g = gen_binomial(8, 2 / 3, seed=6)
    times = np.linspace(0.0, 1.0, 11)
    hp2d, eps = two_level_prediction(g, 0.3, times)
    assert hp2d[0] == 0.0 and eps[0] == 0.0
    assert np.all(hp2d <= 0.0)
    assert_allclose(eps, torsion(g, 0.3) * times**4)
    with pytest.raises(ShortTimeError):
        two_level_prediction(g, 0.0, times)


def test_triangle_free_large_n_minimum():
    # for gamma^2 kappa2 >> (2 kappa2/kappa2)^2 the minimum approaches -4/gamma
    g = ring(200)
    gamma = 5.0
    w2 = omega_squared(g, gamma)
    times = np.linspace(0.0, 2 * np.pi / np.sqrt(w2), 4001)
    hp2d, _ = two_level_prediction(g, gamma, times)
    assert hp2d.min() == pytest.approx(-4.0 / gamma, rel=2e-3)


def test_single_edge_two_level_is_exact(single_edge):
    # the even sector is two-dimensional, so the closed form is exact
    times = np.linspace(0.0, 5.0, 300)
    hp2d, _ = two_level_prediction(single_edge, 1.0, times)
    traj = evolve(sector_walk(single_edge, 1.0),
                  uniform_plus_state(2, "spinflip_plus"), times)
    assert_allclose(hp2d, traj.observables["hp"], atol=1e-9)
    assert_allclose(hp2d, -0.8 * np.sin(np.sqrt(5.0) * times) ** 2, atol=1e-12)


def test_short_time_agreement_12q():
    # small-gamma regime: quantitative agreement inside the low-leakage window
    g = gen_binomial(12, 2 / 3, seed=40)
    gamma = 0.05
    ana = analyze(g, gamma)
    t_window = (0.01 / ana.torsion) ** 0.25
    times = np.linspace(0.0, t_window, 200)
    hp2d, eps = two_level_prediction(g, gamma, times)
    traj = evolve(sector_walk(g, gamma), uniform_plus_state(12, "spinflip_plus"),
                  times)
    exact = traj.observables["hp"]
    rel = np.abs(hp2d - exact) / np.maximum(np.abs(exact), 0.05)
    assert eps.max() <= 0.01 + 1e-12
    assert rel.max() <= 0.05
