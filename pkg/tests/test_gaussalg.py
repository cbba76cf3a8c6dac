"""Gauss-Hermite algebra tests against the quadrature oracle."""

import io
import math

import numpy as np
import pytest

from gausskern import gaussalg, oracle
from gausskern.gaussalg import (
    GaussFactor,
    GaussHermiteTerm,
    GaussianExpansion,
    compress,
    dump_expansion,
    evaluate_batch,
    expansion_l2_inner,
    expansion_of,
    fourier,
    gram_matrix,
    h1_norm,
    inverse_fourier,
    load_expansion,
    product,
    prune,
    seminorm_inner,
    sobolev_inner,
)


def rand_term(rng, dim=3, degree=0):
    A = rng.standard_normal((dim, dim))
    Q = A @ A.T + 0.3 * np.eye(dim)
    poly = {(0,) * dim: 1.0}
    if degree > 0:
        alpha = [0] * dim
        alpha[rng.integers(dim)] = degree
        poly[tuple(alpha)] = rng.uniform(-1, 1)
    return GaussHermiteTerm(coeff=rng.uniform(-2, 2),
                            center=rng.uniform(-1, 1, dim),
                            precision=Q, poly=poly)


def test_product_pointwise():
    rng = np.random.default_rng(7)
    X = rng.uniform(-2, 2, (40, 3))
    for _ in range(25):
        t1 = rand_term(rng, degree=rng.integers(0, 3))
        t2 = rand_term(rng, degree=rng.integers(0, 3))
        p = product(t1, t2)
        for x in X[:8]:
            assert p(x) == pytest.approx(t1(x) * t2(x), abs=1e-12, rel=1e-12)


def test_product_with_factor_pointwise():
    rng = np.random.default_rng(8)
    for _ in range(25):
        t = rand_term(rng, degree=rng.integers(0, 3))
        A = rng.standard_normal((3, 3))
        f = GaussFactor(coeff=rng.uniform(0.1, 2.0),
                        center=rng.uniform(-1, 1, 3),
                        precision=A @ A.T + 0.2 * np.eye(3))
        p = product(t, f)
        for x in rng.uniform(-2, 2, (8, 3)):
            assert p(x) == pytest.approx(t(x) * f(x), abs=1e-12, rel=1e-12)


def rand_term_mild(rng, degree=0):
    # widths kept moderate so tensor quadrature resolves the transform
    A = rng.standard_normal((3, 3))
    U, _, _ = np.linalg.svd(A)
    Q = (U * rng.uniform(0.5, 3.0, 3)) @ U.T
    poly = {(0, 0, 0): 1.0}
    if degree > 0:
        alpha = [0, 0, 0]
        alpha[int(rng.integers(3))] = int(degree)
        poly[tuple(alpha)] = rng.uniform(-1, 1)
    return GaussHermiteTerm(coeff=rng.uniform(-2, 2),
                            center=rng.uniform(-1, 1, 3),
                            precision=Q, poly=poly)


def test_fourier_matches_quadrature():
    # analytic Fourier transform against direct quad3d of e(x) exp(-i w.x)
    rng = np.random.default_rng(11)
    grid = oracle.QuadratureGrid(L=9.0, n=72)
    for _ in range(4):
        t = rand_term_mild(rng, degree=rng.integers(0, 3))
        e = expansion_of(t, 1)
        rep = fourier(t)
        for w in rng.uniform(-2, 2, (3, 3)):
            re = oracle.quad3d(
                lambda X: evaluate_batch(e, X) * np.cos(X @ w), grid)
            im = oracle.quad3d(
                lambda X: evaluate_batch(e, X) * np.sin(-(X @ w)), grid)
            num = (re + 1j * im) / (2 * math.pi) ** 1.5
            assert abs(rep(w) - num) <= 1e-8 * (1.0 + abs(num))


def test_fourier_roundtrip_pointwise():
    rng = np.random.default_rng(12)
    for _ in range(25):
        t = rand_term(rng, degree=rng.integers(0, 3))
        back = inverse_fourier(fourier(t))
        for x in rng.uniform(-2, 2, (8, 3)):
            assert back(x) == pytest.approx(t(x), abs=1e-12, rel=1e-12)


def test_l2_inner_against_oracle():
    rng = np.random.default_rng(13)
    grid = oracle.QuadratureGrid(L=10.0, n=72)
    for _ in range(4):
        e1 = oracle.random_expansion_mild(rng)
        e2 = oracle.random_expansion_mild(rng)
        ana = expansion_l2_inner(e1, e2)
        num = oracle.quad3d(
            lambda X: evaluate_batch(e1, X) * evaluate_batch(e2, X), grid)
        scale = math.sqrt(expansion_l2_inner(e1, e1)
                          * expansion_l2_inner(e2, e2))
        assert abs(num - ana) <= 1e-8 * scale


def test_seminorm_against_oracle():
    rng = np.random.default_rng(14)
    for _ in range(3):
        e = oracle.random_expansion_mild(rng)
        ana = seminorm_inner(e, e, 1)
        num = oracle.fractional_seminorm(e, 1.0, quality="coarse") ** 2
        assert num == pytest.approx(ana, rel=1e-6)


def test_h1_norm_against_oracle():
    rng = np.random.default_rng(15)
    for _ in range(3):
        e = oracle.random_expansion_mild(rng)
        assert oracle.fractional_norm(e, 1.0, quality="coarse") \
            == pytest.approx(h1_norm(e), rel=1e-6)


def test_gaussian_multiplier_against_oracle():
    rng = np.random.default_rng(16)
    for _ in range(3):
        t = rand_term_mild(rng, degree=rng.integers(0, 3))
        alpha = rng.uniform(0.1, 1.5)
        m = gaussalg.apply_gaussian_multiplier(t, alpha)
        e = expansion_of(t, 1)
        X = rng.uniform(-1.5, 1.5, (6, 3))
        ref = oracle.fourier_multiplier_oracle(
            e, lambda W: np.exp(-0.5 * alpha * np.sum(W * W, axis=1)), X)
        got = np.array([m(x) for x in X])
        assert np.max(np.abs(got - ref)) <= 1e-8 * (1.0 + np.max(np.abs(ref)))


def test_sobolev_inner_binomial_identity():
    rng = np.random.default_rng(17)
    e1 = oracle.random_expansion(rng)
    e2 = oracle.random_expansion(rng)
    s0 = seminorm_inner(e1, e2, 0)
    s1 = seminorm_inner(e1, e2, 1)
    s2 = seminorm_inner(e1, e2, 2)
    assert sobolev_inner(e1, e2, 1) == pytest.approx(s0 + s1)
    assert sobolev_inner(e1, e2, 2) == pytest.approx(s0 + 2 * s1 + s2)


def test_gram_matrix_is_spd():
    rng = np.random.default_rng(18)
    e = oracle.random_expansion(rng, n_terms=5)
    G = gram_matrix(e, e)
    assert np.allclose(G, G.T)
    w = np.linalg.eigvalsh(G)
    assert w[0] > -1e-12 * abs(w[-1])


def test_laplacian_pointwise():
    rng = np.random.default_rng(19)
    t = rand_term(rng, degree=1)
    e = GaussianExpansion([t], 1, t.degree + 2)
    lap = gaussalg.laplacian(e)
    h = 1e-5
    for x in rng.uniform(-1, 1, (5, 3)):
        fd = 0.0
        for i in range(3):
            d = np.zeros(3)
            d[i] = h
            fd += (t(x + d) - 2 * t(x) + t(x - d)) / h ** 2
        got = gaussalg.evaluate(lap, x)
        assert got == pytest.approx(fd, rel=1e-5, abs=1e-5)


def test_prune_respects_budget():
    rng = np.random.default_rng(20)
    e = oracle.random_expansion(rng, n_terms=8)
    budget = 0.5 * h1_norm(e)
    p = prune(e, budget)
    assert len(p) <= len(e)
    diff = e + p.scaled(-1.0)
    assert h1_norm(diff) <= budget + 1e-12


def test_compress_caps_terms_and_preserves_function():
    rng = np.random.default_rng(21)
    # duplicate every term so compression can merge without loss
    e = oracle.random_expansion(rng, n_terms=4)
    doubled = GaussianExpansion(
        e.terms + [t for t in e.terms], e.n_electrons, e.degree_cap)
    c = compress(doubled, 4)
    assert len(c) <= 4
    diff = doubled + c.scaled(-1.0)
    assert h1_norm(diff) <= 1e-8 * h1_norm(doubled)


def test_serialization_roundtrip():
    rng = np.random.default_rng(22)
    e = oracle.random_expansion(rng, n_terms=4, max_degree=2)
    buf = io.StringIO()
    dump_expansion(e, buf)
    buf.seek(0)
    back = load_expansion(buf)
    assert len(back) == len(e)
    X = rng.uniform(-2, 2, (30, 3))
    assert np.allclose(evaluate_batch(back, X), evaluate_batch(e, X),
                       rtol=1e-14, atol=1e-14)


def test_term_validation():
    with pytest.raises(ValueError):
        GaussHermiteTerm(coeff=1.0, center=np.zeros(3),
                         precision=-np.eye(3), poly={(0, 0, 0): 1.0})
    Q = np.eye(3)
    Q[0, 1] = 0.5  # not symmetric
    with pytest.raises(ValueError):
        GaussHermiteTerm(coeff=1.0, center=np.zeros(3),
                         precision=Q, poly={(0, 0, 0): 1.0})


def test_expansion_dimension_mismatch():
    rng = np.random.default_rng(23)
    e1 = oracle.random_expansion(rng)
    t = rand_term(rng, dim=6)
    e2 = expansion_of(t, 2)
    with pytest.raises(ValueError):
        expansion_l2_inner(e1, e2)
