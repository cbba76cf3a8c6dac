"""Scheduled Neumann solver and certificate tests."""

import math

import numpy as np
import pytest

from gausskern import expsum, gaussalg, operators, oracle, solver
from gausskern.operators import MolecularSystem, OperatorConfig
from gausskern.solver import (
    TruncationSchedule,
    accuracy_gap_figure,
    build_schedule,
    neumann_solve,
    perturbation_certificate,
)


def hydrogenic(z=2.0):
    return MolecularSystem(n_electrons=1, nuclei=[(np.zeros(3), float(z))])


def contractive_cfg(system, r=1.0, order=None, **kw):
    probe = OperatorConfig(lam=-1.0, gamma=1e-6, h=0.5, vartheta=0.25,
                           k_lo=-20, k_hi=20)
    gamma = operators.select_gamma(probe, system, r)
    args = dict(lam=-1.0, gamma=gamma, h=0.5, vartheta=0.25,
                k_lo=-20, k_hi=20)
    args.update(kw)
    return OperatorConfig(**args)


def unit_gaussian():
    t = gaussalg.GaussHermiteTerm(coeff=1.0, center=np.zeros(3),
                                  precision=np.eye(3),
                                  poly={(0, 0, 0): 1.0}, structured=True)
    return gaussalg.expansion_of(t, 1)


def test_build_schedule_counting_function():
    rng = np.random.default_rng(41)
    f = oracle.random_expansion(rng, n_terms=10, max_degree=0)
    sched = build_schedule(f, r=1.0)
    # tails nonincreasing, kappa certifies n(eps) <= (kappa/eps)^(1/r)
    assert np.all(np.diff(sched.tails) <= 1e-15)
    for eps in np.logspace(-6, 0, 25):
        n = sched.n(eps)
        assert n <= (sched.kappa / eps) ** (1.0 / sched.r) + 1e-9
        # and the selected head really meets the budget
        tail = sched.tails[n]
        assert tail <= eps


def test_build_schedule_orders_by_norm():
    rng = np.random.default_rng(42)
    f = oracle.random_expansion(rng, n_terms=6, max_degree=0)
    sched = build_schedule(f, r=2.0)
    norms = gaussalg.term_h1_norms(sched.expansion)
    assert np.all(np.diff(norms) <= 1e-12)


def test_truncation_caps_nonincreasing():
    with pytest.raises(ValueError):
        TruncationSchedule(q1=0.5, q2=0.5, delta=0.1, epsilon=1e-2,
                           n_levels=(2, 5))
    ts = TruncationSchedule(q1=0.5, q2=0.5, delta=0.1, epsilon=1e-2,
                            n_levels=(5, 3, 0))
    assert ts.as_dict() == {0: 5, 1: 3}


@pytest.mark.parametrize("eps,r", [(1e-2, 1.0), (1e-3, 2.0)])
def test_neumann_solve_residual_and_count(eps, r):
    system = hydrogenic()
    cfg = contractive_cfg(system, r=r)
    f = unit_gaussian()
    u, rep = neumann_solve(f, cfg, system, eps, r)
    slack = eps / 10.0  # reference-application tolerance
    assert rep.residual_norm <= eps + slack
    assert rep.term_count <= rep.count_bound
    assert rep.count_bound == pytest.approx(
        2.0 * (2.0 * rep.kappa / eps) ** (1.0 / r))
    assert rep.operator_bound < 1.0


def test_neumann_solve_rejects_noncontractive():
    system = hydrogenic()
    cfg = OperatorConfig(lam=-1.0, gamma=0.5, h=0.5, vartheta=0.25,
                         k_lo=-20, k_hi=20)
    assert not operators.contraction_constants(cfg, system).contractive
    with pytest.raises(ValueError):
        neumann_solve(unit_gaussian(), cfg, system, 1e-2, 1.0)


def test_perturbation_certificate_recomputed():
    system = hydrogenic()
    cfg = contractive_cfg(system)
    cert = perturbation_certificate(cfg, system)
    eps_v = expsum.error_bound(0.5, cfg.h)
    eps_g = expsum.error_bound(1.0, cfg.h)
    eps = max(eps_v, eps_g)
    theta = operators.theta_const(1, 2.0)
    assert cert.eps_V == pytest.approx(eps_v, rel=1e-12)
    assert cert.eps_G == pytest.approx(eps_g, rel=1e-12)
    assert cert.delta_op == pytest.approx(
        theta * math.sqrt(cfg.gamma) * (2 * eps + eps * eps), rel=1e-12)
    assert cert.accuracy_gap_figure == pytest.approx(
        math.sqrt(cfg.gamma / cfg.h) * math.exp(-math.pi ** 2 / cfg.h),
        rel=1e-12)


def test_gap_figure_closed_form():
    assert accuracy_gap_figure(1e-4, 0.5) == pytest.approx(
        math.sqrt(2e-4) * math.exp(-2.0 * math.pi ** 2))


def test_composed_operator_decay():
    # certified level bound alpha q^n against the measured H1 norm
    system = hydrogenic()
    cfg = contractive_cfg(system)
    rep = oracle.composed_decay_check(2, cfg, system, trials=5, seed=3)
    assert rep.all_hold


def test_solve_report_is_deterministic():
    system = hydrogenic()
    cfg = contractive_cfg(system)
    f = unit_gaussian()
    u1, r1 = neumann_solve(f, cfg, system, 1e-2, 1.0)
    u2, r2 = neumann_solve(f, cfg, system, 1e-2, 1.0)
    assert r1.term_count == r2.term_count
    assert r1.residual_norm == r2.residual_norm
    assert r1.kappa == r2.kappa
