"""Self-checks for the independent quadrature oracles.

The oracles certify the analytic code elsewhere, so here they are pinned
against closed forms and internal consistency only.
"""

import math

import numpy as np
import pytest

from gausskern import gaussalg, oracle
from gausskern.oracle import QuadratureGrid, quad3d


def test_quad3d_gaussian_closed_forms():
    grid = QuadratureGrid(L=8.0, n=64)
    v = quad3d(lambda X: np.exp(-np.sum(X * X, axis=1)), grid)
    assert v == pytest.approx(math.pi ** 1.5, rel=1e-13)
    v2 = quad3d(lambda X: np.sum(X * X, axis=1)
                * np.exp(-np.sum(X * X, axis=1)), grid)
    assert v2 == pytest.approx(1.5 * math.pi ** 1.5, rel=1e-13)


def test_quad3d_odd_integrand_vanishes():
    grid = QuadratureGrid(L=8.0, n=64)
    v = quad3d(lambda X: X[:, 0] * np.exp(-np.sum(X * X, axis=1)), grid)
    assert abs(v) < 1e-15


def test_quad3d_rejects_nonfinite():
    grid = QuadratureGrid(L=4.0, n=16)
    with pytest.raises(ValueError):
        quad3d(lambda X: np.full(len(X), np.nan), grid)


def test_grid_validation():
    with pytest.raises(ValueError):
        QuadratureGrid(L=-1.0, n=32)
    with pytest.raises(ValueError):
        QuadratureGrid(L=5.0, n=4)
    with pytest.raises(ValueError):
        QuadratureGrid(L=5.0, n=32, rule="simpson")


def test_midpoint_and_gauss_agree():
    f = lambda X: np.exp(-0.7 * np.sum(X * X, axis=1))
    a = quad3d(f, QuadratureGrid(L=8.0, n=96, rule=oracle.MIDPOINT))
    b = quad3d(f, QuadratureGrid(L=8.0, n=48, rule=oracle.GAUSS_LEGENDRE))
    assert a == pytest.approx(b, rel=1e-10)


def test_random_expansion_is_seeded():
    e1 = oracle.random_expansion(np.random.default_rng(5))
    e2 = oracle.random_expansion(np.random.default_rng(5))
    X = np.random.default_rng(0).uniform(-1, 1, (10, 3))
    assert np.array_equal(gaussalg.evaluate_batch(e1, X),
                          gaussalg.evaluate_batch(e2, X))


def test_fractional_norm_endpoints():
    # theta = 0 is the plain L2 norm; theta = 1 the full H1 norm
    rng = np.random.default_rng(61)
    e = oracle.random_expansion_mild(rng)
    l2 = math.sqrt(gaussalg.expansion_l2_inner(e, e))
    assert oracle.fractional_norm(e, 0.0, quality="coarse") \
        == pytest.approx(l2, rel=1e-7)
    assert oracle.fractional_norm(e, 1.0, quality="coarse") \
        == pytest.approx(gaussalg.h1_norm(e), rel=1e-6)


def test_fractional_seminorm_interpolates():
    # |v|_t is log-convex in t, so the midpoint is below the geometric mean
    rng = np.random.default_rng(62)
    v = oracle.random_expansion_mild(rng)
    s_half = oracle.fractional_seminorm(v, 1.0, quality="coarse")
    s0 = math.sqrt(gaussalg.expansion_l2_inner(v, v))
    s1 = oracle.fractional_seminorm(v, 2.0, quality="coarse")
    assert s_half <= math.sqrt(s0 * s1) * (1 + 1e-8)


def test_spherical_grid_integrates_gaussian():
    P, w, r = oracle.spherical_points_weights(1e-6, 12.0)
    vals = np.exp(-r ** 2)
    assert vals @ w == pytest.approx(math.pi ** 1.5, rel=1e-12)


def test_radial_weighted_l2_closed_form():
    # int |e^{-r^2/2}|^2 / r^2 dx = 2 pi^{3/2} for the unit Gaussian
    t = gaussalg.GaussHermiteTerm(coeff=1.0, center=np.zeros(3),
                                  precision=np.eye(3),
                                  poly={(0, 0, 0): 1.0})
    e = gaussalg.expansion_of(t, 1)
    # the excised ball r < 1e-6 carries mass ~ 4 pi r_lo for this weight
    v = oracle.radial_weighted_l2(e, -2.0)
    assert v == pytest.approx(2.0 * math.pi ** 1.5 - 4.0 * math.pi * 1e-6,
                              rel=1e-9)


def test_hardy_closed_form_ratio():
    # for the unit-width Gaussian: lhs = 2 pi^{3/2}, rhs = 4 |v|_1^2 = 6 pi^{3/2}
    t = gaussalg.GaussHermiteTerm(coeff=1.0, center=np.zeros(3),
                                  precision=np.eye(3),
                                  poly={(0, 0, 0): 1.0})
    e = gaussalg.expansion_of(t, 1)
    rep = oracle.hardy_check(e)
    assert rep.holds
    assert rep.lhs == pytest.approx(2.0 * math.pi ** 1.5, rel=1e-8)
    assert rep.ratio == pytest.approx(1.0 / 3.0, rel=1e-6)


def test_hardy_rellich_half_is_hardy_like():
    t = gaussalg.GaussHermiteTerm(coeff=1.0, center=np.zeros(3),
                                  precision=np.eye(3),
                                  poly={(0, 0, 0): 1.0})
    e = gaussalg.expansion_of(t, 1)
    rep = oracle.hardy_rellich_check(e, 0.5, quality="coarse")
    assert rep.holds
    assert rep.ratio < 1.0


def test_k_functional_monotone_in_t():
    rng = np.random.default_rng(63)
    u = oracle.random_expansion_mild(rng)
    ts = [0.05, 0.2, 1.0, 5.0]
    vals = [oracle.k_functional_value(u, t, 0.0, 2.0) for t in ts]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    # K(t) <= min(t ||u||_2-ish growth, ||u||_0-ish saturation): bounded
    l2 = math.sqrt(gaussalg.expansion_l2_inner(u, u))
    assert vals[-1] <= l2 * (1 + 1e-8)


def test_k_functional_identity_single_case():
    rng = np.random.default_rng(64)
    u = oracle.random_expansion_mild(rng)
    rep = oracle.k_functional_check(u, 0.0, 2.0, 0.5)
    assert rep.ok
    assert rep.rel_err <= 1e-4


def test_inequality_report_fields():
    rng = np.random.default_rng(65)
    rep = oracle.hardy_check(oracle.random_expansion(rng))
    assert rep.holds == (rep.lhs <= rep.rhs * (1 + 1e-6))
    assert rep.ratio == pytest.approx(rep.lhs / rep.rhs)
