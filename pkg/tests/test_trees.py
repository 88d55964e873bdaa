import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from regwave.errors import DomainError, ParameterError
from regwave.graphs import RegularGraph, ball
from regwave.trees import (
    ary_tree_ball,
    chebyshev_U,
    chebyshev_U_trig,
    classical_locations,
    common_ancestor_depth,
    edge_constant,
    edge_wave_correlation,
    kesten_mckay_upper_mass,
    m_d,
    m_d_closed_form,
    m_sc,
    p_weighted,
    regular_tree_ball,
    rho_d,
    sample_gaussian_wave,
    tree_green_ary,
    tree_green_regular,
    tree_parents,
    wave_correlation,
    wave_covariance,
    x_ell,
    y_ell,
)

upper = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False).filter(lambda z: z.imag > 1e-3)


def test_m_sc_examples():
    assert m_sc(2) == pytest.approx(-1)
    z = 2 + 0.01j
    assert abs(m_sc(z) + 1) == pytest.approx(abs(z - 2) ** 0.5, rel=0.15)
    z = 10j
    m = m_sc(z)
    assert abs(m * m + z * m + 1) < 1e-12


@settings(max_examples=200)
@given(upper)
def test_m_sc_properties(z):
    m = m_sc(z)
    assert m.imag > 0
    assert abs(m * m + z * m + 1) < 1e-10 * max(1, abs(z)) ** 2


@settings(max_examples=200)
@given(upper, st.integers(3, 8))
def test_m_d_closed_forms_agree(z, d):
    if abs(d * d - (d - 1) * z * z) < 1e-3:
        return
    assert abs(m_d(z, d) - m_d_closed_form(z, d)) < 1e-10 * max(1, abs(m_d(z, d)))
    assert m_d(z, d).imag > 0


def test_m_d_edge_values():
    assert m_d(2, 3) == pytest.approx(-2)
    eps = 1e-6
    assert ((m_d(2 + eps, 3) + 2) / math.sqrt(eps)).real == pytest.approx(edge_constant(3), rel=0.05)
    assert edge_constant(3) == 6 and edge_constant(4) == 3
    with pytest.raises(DomainError):
        edge_constant(2)


def test_im_m_d_comparable_to_im_m_sc():
    xs = np.linspace(1.5, 2.5, 21)
    for eta in (1e-3, 1e-2, 1e-1):
        r = np.array([m_d(x + 1j * eta, 3).imag / m_sc(x + 1j * eta).imag for x in xs])
        assert r.min() > 0.1 and r.max() < 10


def test_rho_d():
    assert rho_d(2, 3) == 0 and rho_d(-2, 3) == 0 and rho_d(3, 3) == 0
    assert rho_d(0, 3) == pytest.approx(2 / (3 * math.pi), abs=1e-12)
    mass, _ = integrate.quad(rho_d, -2, 2, args=(3,), epsabs=1e-12)
    assert mass == pytest.approx(1, abs=1e-8)


@pytest.mark.parametrize("d", [3, 4, 7])
def test_upper_mass_vs_adaptive_quadrature(d):
    for x in (-1.9, -0.5, 0.3, 1.7, 1.99):
        ref, _ = integrate.quad(rho_d, x, 2, args=(d,), epsabs=1e-13)
        assert kesten_mckay_upper_mass(x, d) == pytest.approx(ref, abs=1e-11)


def test_classical_locations():
    n = 1000
    gam = classical_locations(n, 3)
    assert len(gam) == n - 1
    assert np.all(np.diff(gam[:-1]) < 0)
    assert kesten_mckay_upper_mass(gam[0], 3) == pytest.approx(1.5 / 999, abs=1e-10)
    # the median sits at i - 1/2 = (N - 1)/2, i.e. i = N/2 + 1/2 ... for even N
    # the index i = N/2 has mass (N/2 - 1/2)/(N - 1) = 1/2
    gmed = classical_locations(1000, 3)[1000 // 2 - 2]
    assert abs(gmed) < 1e-8
    for N in (1000, 10000):
        g2 = classical_locations(N, 3)[0]
        assert 0.1 <= (2 - g2) * N ** (2 / 3) <= 10


def test_classical_locations_tail_mass_exceeds_one():
    # i = N gives (N - 1/2)/(N - 1) > 1; the location is the left edge
    assert classical_locations(50, 3)[-1] == pytest.approx(-2)


def test_tree_green_regular_examples():
    z = 1.3 + 0.4j
    assert tree_green_regular(0, z, 4) == pytest.approx(m_d(z, 4))
    assert tree_green_regular(2, 2, 3) == pytest.approx(-1)


def test_tree_green_vs_finite_solve():
    d, R = 3, 6
    z = 0.7 + 0.3j
    tb = regular_tree_ball(d, R)
    P, verts = p_weighted(tb, z, m_sc(z), d)
    parent = tree_parents(tb)
    dist = tb.distance_matrix()
    for a in range(0, len(verts), 17):
        for b in range(0, len(verts), 23):
            assert abs(P[a, b] - tree_green_regular(int(dist[a, b]), z, d)) < 1e-9


def test_tree_green_ary_vs_finite_solve():
    d, R = 3, 6
    z = -0.4 + 0.5j
    tb = ary_tree_ball(d, R)
    P, verts = p_weighted(tb, z, m_sc(z), d)
    parent = tree_parents(tb)
    dist = tb.distance_matrix()
    assert P[0, 0] == pytest.approx(m_sc(z), abs=1e-12)
    for a in range(0, len(verts), 7):
        for b in range(0, len(verts), 5):
            anc = common_ancestor_depth(parent, tb.depth, verts[a], verts[b])
            assert abs(P[a, b] - tree_green_ary(int(dist[a, b]), anc, z, d)) < 1e-9


def test_tree_green_ary_root_reduction():
    z = 1.1 + 0.2j
    q = -m_sc(z) / math.sqrt(2)
    assert tree_green_ary(0, 0, z, 3) == pytest.approx(m_sc(z))
    assert tree_green_ary(1, 0, z, 3) == pytest.approx(m_sc(z) * q)


def test_p_weighted_single_vertex_and_residual():
    z, delta, d = 0.5 + 0.5j, 0.2 + 0.1j, 3
    P, _ = p_weighted(np.zeros((1, 1)), z, delta, d)
    assert P[0, 0] == pytest.approx(1 / (-z - d * delta / (d - 1)))
    tb = regular_tree_ball(d, 3)
    P, _ = p_weighted(tb, z, delta, d)
    A = tb.local_adjacency()
    W = np.diag((d - A.sum(1)) * delta / (d - 1))
    M = A / math.sqrt(d - 1) - z * np.eye(len(A)) - W
    assert np.abs(M @ P - np.eye(len(A))).max() < 1e-10


def test_p_weighted_removal():
    z, d = 0.3 + 0.7j, 3
    tb = regular_tree_ball(d, 2)
    P, verts = p_weighted(tb, z, m_sc(z), d, removed=[0])
    assert 0 not in verts and len(verts) == len(tb) - 1


@pytest.mark.parametrize("d", [3, 4, 5])
def test_x_ell_y_ell_match_finite_solve(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        z = complex(rng.uniform(-3, 3), rng.uniform(0.05, 2))
        delta = complex(rng.uniform(-1, 1), rng.uniform(0, 1))
        for ell in (0, 1, 3, 5):
            P, _ = p_weighted(regular_tree_ball(d, ell), z, delta, d)
            assert abs(P[0, 0] - x_ell(delta, z, ell, d)) < 1e-9
            P, _ = p_weighted(ary_tree_ball(d, ell), z, delta, d)
            assert abs(P[0, 0] - y_ell(delta, z, ell)) < 1e-9


@settings(max_examples=100)
@given(upper, st.integers(0, 8), st.integers(3, 6))
def test_fixed_points(z, ell, d):
    ms = m_sc(z)
    assert abs(y_ell(ms, z, ell) - ms) < 1e-10
    assert abs(x_ell(ms, z, ell, d) - m_d(z, d)) < 1e-10


def test_y_ell_rejects_negative_depth():
    with pytest.raises(ParameterError):
        y_ell(0.1j, 1j, -1)


def test_chebyshev():
    assert chebyshev_U(0, 0.3) == 1 and chebyshev_U(1, 0.3) == pytest.approx(0.6)
    for r in range(10):
        assert chebyshev_U(r, 1.0) == pytest.approx(r + 1)
    assert chebyshev_U(5, 0.3) == pytest.approx(chebyshev_U_trig(5, 0.3), abs=1e-12)
    assert chebyshev_U(-1, 0.4) == 0 and chebyshev_U(-2, 0.4) == -1
    with pytest.raises(ParameterError):
        chebyshev_U(-3, 0.1)


@settings(max_examples=100)
@given(st.integers(0, 30), st.floats(-1.5, 1.5))
def test_chebyshev_recurrence(r, theta):
    lhs = chebyshev_U(r + 1, theta)
    rhs = 2 * theta * chebyshev_U(r, theta) - chebyshev_U(r - 1, theta)
    assert abs(lhs - rhs) < 1e-10 * max(1, abs(lhs))


def test_wave_correlation_values():
    lam = 2 * math.sqrt(2)
    assert wave_correlation(0, 0.7, 4) == pytest.approx(1)
    assert wave_correlation(1, lam, 3) == pytest.approx(4 / (3 * math.sqrt(2)))
    assert wave_correlation(2, lam, 3) == pytest.approx(5 / 6)
    for r in range(8):
        assert wave_correlation(r, 2 * math.sqrt(4), 5) == pytest.approx(edge_wave_correlation(r, 5))


def test_wave_covariance_ratio_of_green_functions():
    # Cov = lim Im G_ij / Im G_oo on the tree for the unnormalized operator at lambda + i eps
    d = 3
    for lam in (0.5, 2.0, 2 * math.sqrt(2) - 1e-3):
        z = lam / math.sqrt(d - 1) + 1e-6j
        for r in range(4):
            ratio = tree_green_regular(r, z, d).imag / tree_green_regular(0, z, d).imag
            assert ratio == pytest.approx(wave_correlation(r, lam, d), abs=1e-4)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_wave_covariance_invariants(d):
    for lam in np.linspace(-2 * math.sqrt(d - 1), 2 * math.sqrt(d - 1), 5):
        cov = wave_covariance(d, lam, regular_tree_ball(d, 3))
        C = cov.matrix
        assert np.allclose(np.diag(C), 1)
        assert np.linalg.eigvalsh(C).min() > -1e-10
        A = cov.ball.local_adjacency()
        rows = cov.interior()
        assert np.abs((A @ C - lam * C)[rows]).max() < 1e-10
    # concrete instance d = 3: 3 * 4/(3 sqrt 2) = 2 sqrt 2
    assert 3 * wave_correlation(1, 2 * math.sqrt(2), 3) == pytest.approx(2 * math.sqrt(2))


def test_wave_covariance_errors():
    k4 = RegularGraph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    with pytest.raises(DomainError):
        wave_covariance(3, 1.0, ball(k4, 0, 1))
    with pytest.raises(DomainError):
        wave_covariance(3, 3.5, regular_tree_ball(3, 1))


def test_wave_covariance_csv():
    cov = wave_covariance(3, 1.0, regular_tree_ball(3, 1))
    lines = cov.to_csv().splitlines()
    assert lines[0] == "row,col,value" and len(lines) == 1 + 16


def test_gaussian_wave_sampler():
    d = 3
    lam = 2 * math.sqrt(2)
    assert np.shape(sample_gaussian_wave(wave_covariance(d, lam, regular_tree_ball(d, 0)), 0)) == (1,)
    cov = wave_covariance(d, lam, regular_tree_ball(d, 2))
    X = sample_gaussian_wave(cov, np.random.default_rng(1), size=100_000)
    emp = X.T @ X / len(X)
    assert np.abs(emp - cov.matrix).max() < 0.02
    A = cov.ball.local_adjacency()
    rows = cov.interior()
    assert np.abs((X @ A.T - lam * X)[:, rows]).max() < 1e-6
