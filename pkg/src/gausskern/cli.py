"""Command-line entry point: config parsing, run orchestration, and
result serialization.

Inputs are TOML, outputs JSON or CSV.  All quantities are in the units
of the underlying model, where the kinetic term carries no factor 1/2;
divide energies by 2 to map them to the usual Hartree convention.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import eigensolver, expsum, gaussalg, operators, oracle, solver
from .eigensolver import InverseIterationConfig
from .operators import MolecularSystem, OperatorConfig


class ConfigError(Exception):
    """Raised for schema or invariant violations with a field path."""


@dataclass
class RunConfig:
    system: MolecularSystem
    operator: OperatorConfig
    solver: dict = field(default_factory=dict)
    eigen: InverseIterationConfig = None
    out_dir: str = "."
    seed: int = 0


def _require(cond: bool, path: str, msg: str):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _parse_system(raw: dict) -> MolecularSystem:
    _require("nuclei" in raw, "system.nuclei", "missing")
    nuclei = []
    for i, nuc in enumerate(raw["nuclei"]):
        p = f"system.nuclei[{i}]"
        _require("pos" in nuc and len(nuc["pos"]) == 3, p + ".pos",
                 "need a 3-vector")
        charge = nuc.get("charge", nuc.get("Z"))
        _require(charge is not None and charge > 0, p + ".charge",
                 "need a positive charge")
        nuclei.append((np.asarray(nuc["pos"], dtype=float), float(charge)))
    n = int(raw.get("n_electrons", 1))
    _require(n >= 1, "system.n_electrons", "must be >= 1")
    return MolecularSystem(n_electrons=n, nuclei=tuple(nuclei))


def _parse_operator(raw: dict, system: MolecularSystem) -> OperatorConfig:
    h = float(raw.get("h", 0.5))
    _require(h > 0, "operator.h", "must be positive")
    lam = float(raw.get("lam", -1.0))
    _require(lam < 0, "operator.lam", "must be negative")
    vartheta = float(raw.get("vartheta", 0.25))
    _require(0 < vartheta < 0.5, "operator.vartheta",
             "must lie in (0, 1/2)")
    k_lo = int(raw.get("k_lo", -8))
    k_hi = int(raw.get("k_hi", 8))
    _require(k_lo <= k_hi, "operator.k_lo", "k_lo must not exceed k_hi")
    if "gamma" in raw:
        gamma = float(raw["gamma"])
        _require(0 < gamma < 1, "operator.gamma", "gamma must lie in (0,1)")
    else:
        # default: the largest width that certifies a contractive regime
        probe = OperatorConfig(lam=lam, gamma=0.5, h=h, vartheta=vartheta,
                               k_lo=k_lo, k_hi=k_hi)
        gamma = operators.select_gamma(probe, system,
                                       float(raw.get("order_r", 1.0)))
    return OperatorConfig(lam=lam, gamma=gamma, h=h, vartheta=vartheta,
                          k_lo=k_lo, k_hi=k_hi)


def _parse_eigen(raw: dict, system: MolecularSystem) -> InverseIterationConfig:
    theta = operators.theta_const(system.n_electrons, system.total_charge)
    mu = float(raw.get("mu", theta ** 2 / 2.0))
    _require(mu > theta ** 2 / 4.0, "eigen.mu",
             f"must exceed theta^2/4 = {theta ** 2 / 4.0:.6g}")
    kwargs = {}
    for key in ("h", "variant", "delta_tol", "max_iter", "prune_budget",
                "max_terms", "stop_tol", "tail_tol",
                "enforce_admissibility"):
        if key in raw:
            kwargs[key] = raw[key]
    try:
        return InverseIterationConfig(mu=mu, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"eigen: {exc}") from exc


def parse_config(path: str) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    _require("system" in raw, "system", "missing section")
    system = _parse_system(raw["system"])
    operator = _parse_operator(raw.get("operator", {}), system)
    eigen = _parse_eigen(raw.get("eigen", {}), system)
    return RunConfig(system=system, operator=operator,
                     solver=dict(raw.get("solver", {})), eigen=eigen,
                     out_dir=raw.get("out_dir", "."),
                     seed=int(raw.get("seed", 0)))


# ---------------------------------------------------------------------------
# output helpers


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)}")


def _write_json(payload: dict, path: str = None):
    text = json.dumps(payload, indent=2, sort_keys=True,
                      default=_json_default)
    if path is None:
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_expsum_table(args) -> int:
    params = expsum.ExpSumParams(beta=args.beta, h=args.h,
                                 r_min=args.rmin, r_max=args.rmax,
                                 tail_tol=args.tail_tol)
    es = expsum.build_exp_sum(params)
    eps = expsum.error_bound(args.beta, args.h)
    grid = np.logspace(math.log10(args.rmin), math.log10(args.rmax),
                       args.grid)
    rows = []
    for r in grid:
        exact = es.target(r)
        approx = es(r)
        rows.append((r, exact, approx, (approx - exact) / exact))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        out.write(f"# beta={args.beta} h={args.h} error_bound={eps:.17e}\n")
        writer = csv.writer(out)
        writer.writerow(["r", "exact", "approx", "rel_error"])
        for r, exact, approx, rel in rows:
            writer.writerow([f"{r:.17e}", f"{exact:.17e}",
                             f"{approx:.17e}", f"{rel:.17e}"])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_constants(args) -> int:
    cfg = parse_config(args.config)
    est = operators.contraction_constants(cfg.operator, cfg.system)
    theta = operators.theta_const(cfg.system.n_electrons,
                                  cfg.system.total_charge)
    r = float(cfg.solver.get("r", 1.0))
    threshold = operators.gamma_threshold(cfg.operator, cfg.system, r)
    payload = {
        "theta": theta,
        "kappa": operators.kappa_theta(cfg.operator.vartheta),
        "kappa_star": operators.kappa_star(cfg.operator.lam,
                                           cfg.operator.vartheta),
        "alpha": est.alpha,
        "q": est.q,
        "operator_bound": est.operator_bound,
        "fanout_M": cfg.system.fanout,
        "gamma": cfg.operator.gamma,
        "admissible": bool(est.alpha <= threshold),
        "admissibility_threshold": threshold,
    }
    _write_json(payload, args.out)
    return 0


def _default_rhs(system: MolecularSystem) -> gaussalg.GaussianExpansion:
    term = gaussalg.GaussHermiteTerm(
        coeff=1.0, center=np.zeros(3 * system.n_electrons),
        precision=np.eye(3 * system.n_electrons), structured=True)
    return gaussalg.expansion_of(term, system.n_electrons)


def cmd_solve(args) -> int:
    cfg = parse_config(args.config)
    epsilon = args.epsilon if args.epsilon is not None \
        else float(cfg.solver.get("epsilon", 1e-2))
    r = args.order if args.order is not None \
        else float(cfg.solver.get("r", 1.0))
    f = _default_rhs(cfg.system)
    est = operators.contraction_constants(cfg.operator, cfg.system)
    if not est.contractive:
        print(f"error: configuration is not contractive "
              f"(operator_bound = {est.operator_bound:.6g} >= 1)",
            file=sys.stderr)
        return 1
    u, report = solver.neumann_solve(f, cfg.operator, cfg.system,
                                     epsilon, r)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "solution.jsonl"), "w") as fh:
        gaussalg.dump_expansion(u, fh)
    payload = {
        "epsilon": report.epsilon,
        "r": report.r,
        "kappa": report.kappa,
        "term_count": report.term_count,
        "count_bound": report.count_bound,
        "residual_norm": report.residual_norm,
        "operator_bound": report.operator_bound,
        "levels": report.levels,
        "certificate": asdict(report.certificate),
    }
    _write_json(payload, os.path.join(args.out, "report.json"))
    return 0


def cmd_eigen(args) -> int:
    cfg = parse_config(args.config)
    ecfg = cfg.eigen
    overrides = {}
    if args.variant is not None:
        overrides["variant"] = {
            "potential": eigensolver.POTENTIAL_FORM,
            "residual": eigensolver.RESIDUAL_FORM,
        }[args.variant]
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    if overrides:
        from dataclasses import replace as _replace
        ecfg = _replace(ecfg, **overrides)
    u0 = eigensolver.default_initial_guess(cfg.system)
    try:
        lam, u, history = eigensolver.run_inverse_iteration(
            cfg.system, u0, ecfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "eigenfunction.jsonl"), "w") as fh:
        gaussalg.dump_expansion(u, fh)
    _write_json({
        "rayleigh_shifted": lam,
        "rayleigh": lam - ecfg.mu,
        "mu": ecfg.mu,
        "steps": [asdict(s) for s in history.steps],
    }, os.path.join(args.out, "history.json"))
    with open(os.path.join(args.out, "convergence.csv"), "w",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "rayleigh", "residual_norm", "terms"])
        for i, s in enumerate(history.steps):
            writer.writerow([i, f"{s.rayleigh:.17e}",
                             f"{s.residual_h1_norm:.17e}", s.term_count])
    return 0


def _suite_expsum(seed: int) -> dict:
    margins = {}
    for beta, h, tol in ((0.5, 0.5, 1e-7), (1.0, 0.5, 1e-7),
                         (0.5, 0.25, 1e-13), (1.0, 0.25, 1e-13)):
        params = expsum.ExpSumParams(beta=beta, h=h, r_min=1e-3,
                                     r_max=1e3, tail_tol=1e-18)
        es = expsum.build_exp_sum(params)
        worst = max(abs(es(r) - es.target(r)) / es.target(r)
                    for r in np.logspace(-3, 3, 200))
        margins[f"beta={beta}_h={h}"] = {
            "max_rel_error": worst, "tolerance": tol,
            "ok": worst <= tol,
        }
    return margins


def _suite_algebra(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    grid = oracle.QuadratureGrid(L=10.0, n=72)
    worst = 0.0
    for _ in range(10):
        e1 = oracle.random_expansion_mild(rng)
        e2 = oracle.random_expansion_mild(rng)
        num = oracle.quad3d(
            lambda P: gaussalg.evaluate_batch(e1, P)
            * gaussalg.evaluate_batch(e2, P), grid)
        ana = gaussalg.expansion_l2_inner(e1, e2)
        scale = math.sqrt(gaussalg.expansion_l2_inner(e1, e1)
                          * gaussalg.expansion_l2_inner(e2, e2))
        worst = max(worst, abs(num - ana) / scale)
    return {"l2_inner_worst_rel": worst, "tolerance": 1e-8,
            "ok": worst <= 1e-8}


def _suite_inequalities(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    out = {}
    worst = 0.0
    for _ in range(10):
        rep = oracle.hardy_check(oracle.random_expansion(rng))
        worst = max(worst, rep.ratio)
    out["hardy"] = {"worst_ratio": worst, "ok": worst <= 1.0 + 1e-6}
    rep = oracle.potential_slice_bound_check(range(-4, 5), 0.25, 0.5,
                                             trials=10, seed=seed)
    out["kernel_slice"] = {"worst_ratio": rep.worst, "ok": rep.all_hold}
    rep = oracle.cutoff_bound_check(0.25, 1e-2, trials=10, seed=seed)
    out["cutoff"] = {"worst_ratio": rep.worst, "ok": rep.all_hold}
    return out


def _suite_kfunctional(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(3):
        u = oracle.random_expansion_mild(rng)
        rep = oracle.k_functional_check(u, 0.0, 2.0, 0.5)
        worst = max(worst, rep.rel_err)
    return {"worst_rel_err": worst, "tolerance": 1e-4, "ok": worst <= 1e-4}


_SUITES = {
    "expsum": _suite_expsum,
    "algebra": _suite_algebra,
    "inequalities": _suite_inequalities,
    "kfunctional": _suite_kfunctional,
}


def cmd_validate(args) -> int:
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    report = {"seed": args.seed, "suites": {}}
    ok = True
    for name in names:
        res = _SUITES[name](args.seed)
        report["suites"][name] = res
        for v in res.values():
            if isinstance(v, dict) and not v.get("ok", True):
                ok = False
    report["passed"] = ok
    _write_json(report, args.out)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausskern",
        description="Certified Gaussian-sum kernels, operators, and "
                    "solvers for Coulomb-type problems.")
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("GAUSSKERN_THREADS", 0)),
                        help="worker threads for the linear algebra "
                             "backend (0 = auto)")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("expsum-table",
                       help="tabulate a kernel sum against its target")
    p.add_argument("--beta", type=float, required=True, choices=[0.5, 1.0])
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--rmin", type=float, default=1e-3)
    p.add_argument("--rmax", type=float, default=1e3)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--tail-tol", type=float, default=1e-16)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_expsum_table)

    p = sub.add_parser("constants", help="report contraction constants")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("solve", help="run the scheduled series solver")
    p.add_argument("--config", required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--order", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eigen", help="run the inverse iteration")
    p.add_argument("--config", required=True)
    p.add_argument("--variant", choices=["potential", "residual"],
                   default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("validate", help="run the oracle suites")
    p.add_argument("--suite", default="all",
                   choices=["expsum", "algebra", "inequalities", "kfunctional",
                            "all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_validate)
    return parser


def dispatch(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if getattr(args, "command", None) is None:
        parser.print_usage(sys.stderr)
        return 2
    if args.threads > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
