"""Split-operator tests: slices, counting, contraction constants."""

import math

import numpy as np
import pytest

from gausskern import expsum, gaussalg, operators, oracle
from gausskern.operators import (
    MolecularSystem,
    OperatorConfig,
    apply_Gk,
    apply_P,
    apply_Q,
    apply_T_kl,
    apply_Vk,
    contraction_constants,
    gamma_threshold,
    level_pairs,
    pair_count,
    potential_factors,
    select_gamma,
    theta_const,
)


def one_electron_system(z=1.0):
    return MolecularSystem(n_electrons=1,
                           nuclei=[(np.zeros(3), float(z))])


def base_cfg(**kw):
    args = dict(lam=-1.0, gamma=1e-4, h=0.5, vartheta=0.25,
                k_lo=-20, k_hi=20)
    args.update(kw)
    return OperatorConfig(**args)


def test_theta_const_values():
    assert theta_const(1, 1.0) == pytest.approx(2.0)
    assert theta_const(2, 2.0) == pytest.approx(5.0 * math.sqrt(2.0))
    with pytest.raises(ValueError):
        theta_const(0, 1.0)


def test_contraction_constants_formula():
    cfg = base_cfg()
    sys1 = one_electron_system(z=2.0)
    est = contraction_constants(cfg, sys1)
    t, h = cfg.vartheta, cfg.h
    kap = (1.0 / math.sqrt(math.pi)
           * ((2 + 2 * t) / math.e) ** (0.5 * (1 + t))
           * 2.0 / (t * (1 - 2 * t)))
    kap_star = max(1.0, (-t / (cfg.lam * math.e)) ** t)
    alpha = (kap_star * kap * (t * h) ** 2 * (2 * 2.0 + 1 - 1)
             / (4.0 * math.sqrt(2.0))) * cfg.gamma ** (0.5 - t)
    q = math.exp(-0.5 * t * h)
    assert est.alpha == pytest.approx(alpha, rel=1e-12)
    assert est.q == pytest.approx(q, rel=1e-14)
    assert est.operator_bound == pytest.approx(
        alpha * ((1 + q) / (1 - q)) ** 2, rel=1e-12)


def test_pair_count_and_generating_sum():
    # l(0) = 1, l(n) = 4n, and sum l(n) q^n = ((1+q)/(1-q))^2
    assert pair_count(0) == 1
    assert [pair_count(n) for n in range(1, 6)] == [4, 8, 12, 16, 20]
    q = 0.5
    total = sum(pair_count(n) * q ** n for n in range(400))
    assert total == pytest.approx(((1 + q) / (1 - q)) ** 2, abs=1e-10)


def test_level_pairs_enumeration():
    for n in range(5):
        pairs = level_pairs(n, -100, 100)
        assert len(pairs) == pair_count(n)
        assert all(abs(k) + abs(l) == n for k, l in pairs)
        assert len(set(pairs)) == len(pairs)
    # range clipping drops pairs outside [k_lo, k_hi]
    clipped = level_pairs(3, 0, 100)
    assert all(k >= 0 and l >= 0 for k, l in clipped)


@pytest.mark.parametrize("n,k", [(1, 1), (2, 1), (2, 2)])
def test_fanout_counts(n, k):
    nuclei = [(np.array([float(i), 0.0, 0.0]), 1.0) for i in range(k)]
    system = MolecularSystem(n_electrons=n, nuclei=nuclei)
    m = 4 * (k * n + n * (n - 1) // 2)
    assert system.fanout == m
    cfg = base_cfg()
    assert len(potential_factors(0, system, cfg)) == m // 4
    t = gaussalg.GaussHermiteTerm(coeff=1.0, center=np.zeros(3 * n),
                                  precision=np.eye(3 * n),
                                  poly={(0,) * (3 * n): 1.0})
    e = gaussalg.expansion_of(t, n)
    assert len(apply_Vk(e, 0, system, cfg)) == m // 4
    assert len(apply_T_kl(e, 0, 0, system, cfg)) == m // 2


def test_apply_Vk_is_pointwise_multiplication():
    rng = np.random.default_rng(31)
    system = one_electron_system(z=1.5)
    cfg = base_cfg()
    t = gaussalg.GaussHermiteTerm(coeff=0.7, center=np.array([0.2, -0.1, 0.3]),
                                  precision=1.3 * np.eye(3),
                                  poly={(0, 0, 0): 1.0})
    e = gaussalg.expansion_of(t, 1)
    for k in (-2, 0, 3):
        ve = apply_Vk(e, k, system, cfg)
        w = cfg.h / math.sqrt(math.pi) * math.exp(0.5 * k * cfg.h)
        prec = 2.0 * math.exp(k * cfg.h)
        for x in rng.uniform(-1.5, 1.5, (6, 3)):
            slab = -1.5 * w * math.exp(-0.5 * prec * float(x @ x))
            got = gaussalg.evaluate(ve, x)
            assert got == pytest.approx(t(x) * slab, rel=1e-12, abs=1e-14)


def test_potential_slices_sum_to_kernel():
    # summing the V_k factors over k recovers -Z/r via the beta=1/2 sum
    system = one_electron_system(z=1.0)
    cfg = base_cfg(h=0.25)
    r = np.logspace(-1, 1, 40)
    total = np.zeros_like(r)
    for k in range(-260, 200):
        w = cfg.h / math.sqrt(math.pi) * math.exp(0.5 * k * cfg.h)
        total += -w * np.exp(-math.exp(k * cfg.h) * r ** 2)
    assert np.allclose(total, -1.0 / r, rtol=1e-12)


def test_apply_Gk_matches_multiplier_oracle():
    rng = np.random.default_rng(32)
    cfg = base_cfg()
    e = oracle.random_expansion_mild(rng, n_terms=2, max_degree=0)
    X = rng.uniform(-1.0, 1.0, (5, 3))
    for k in (-1, 0, 1):
        ge = apply_Gk(e, k, cfg)
        ekh = math.exp(k * cfg.h)
        pref = cfg.h * math.exp(ekh * cfg.lam + k * cfg.h)
        ref = oracle.fourier_multiplier_oracle(
            e, lambda W, a=ekh: pref * np.exp(-a * np.sum(W * W, axis=1)), X)
        got = gaussalg.evaluate_batch(ge, X)
        assert np.max(np.abs(got - ref)) <= 1e-8 * (1 + np.max(np.abs(ref)))


def test_resolvent_slices_sum_to_symbol():
    # sum_k h exp(e^{kh} lam + kh) exp(-e^{kh} w2) = 1/(w2 - lam)
    cfg = base_cfg(h=0.25)
    w2 = np.linspace(0.0, 30.0, 50)
    total = np.zeros_like(w2)
    for k in range(-80, 200):
        ekh = math.exp(k * cfg.h)
        total += cfg.h * math.exp(ekh * cfg.lam + k * cfg.h) \
            * np.exp(-ekh * w2)
    assert np.allclose(total, 1.0 / (w2 - cfg.lam), rtol=1e-12)


def test_P_plus_Q_is_identity():
    rng = np.random.default_rng(33)
    cfg = base_cfg(gamma=0.05)
    e = oracle.random_expansion(rng)
    p, q = apply_P(e, cfg), apply_Q(e, cfg)
    X = rng.uniform(-2, 2, (30, 3))
    lhs = gaussalg.evaluate_batch(p, X) + gaussalg.evaluate_batch(q, X)
    assert np.allclose(lhs, gaussalg.evaluate_batch(e, X),
                       rtol=1e-12, atol=1e-12)
    assert len(p) == 2 * len(e) and len(q) == len(e)


def test_select_gamma_contractive_and_consistent():
    system = one_electron_system(z=2.0)
    probe = base_cfg()
    gamma = select_gamma(probe, system, 1.0)
    cfg = base_cfg(gamma=gamma)
    est = contraction_constants(cfg, system)
    assert est.contractive
    thr = gamma_threshold(probe, system, 1.0)
    assert gamma <= thr
    # the threshold itself is sharp: 10x above it breaks contraction
    over = contraction_constants(base_cfg(gamma=10.0 * thr), system)
    assert not over.contractive


def test_operator_config_validation():
    with pytest.raises(ValueError):
        base_cfg(vartheta=0.5)  # must stay below 1/2
    with pytest.raises(ValueError):
        base_cfg(lam=0.5)
    with pytest.raises(ValueError):
        base_cfg(h=0.0)
    with pytest.raises(ValueError):
        base_cfg(k_lo=5, k_hi=-5)


def test_system_validation():
    with pytest.raises(ValueError):
        MolecularSystem(n_electrons=0, nuclei=[(np.zeros(3), 1.0)])
    with pytest.raises(ValueError):
        MolecularSystem(n_electrons=1, nuclei=[(np.zeros(3), -1.0)])
    with pytest.raises(ValueError):
        MolecularSystem(n_electrons=1, nuclei=[(np.zeros(2), 1.0)])


def test_default_k_range_widens_with_tolerance():
    lo1, hi1 = operators.default_k_range(0.5, -1.0, tail_tol=1e-10)
    lo2, hi2 = operators.default_k_range(0.5, -1.0, tail_tol=1e-16)
    assert lo2 <= lo1 and hi2 >= hi1
