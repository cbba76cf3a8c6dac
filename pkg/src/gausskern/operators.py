"""Split operators acting on Gaussian expansions.

The shifted Laplacian inverse is approximated by a family of frequency
multipliers G_k, the Coulomb potential by a family of Gaussian interaction
sums V_k, and the high-pass filter P = I - Q isolates the part of the
potential that the composed operators T_{k,l} = G_l P V_k contract.  All
contraction constants are computed in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import expsum, gaussalg
from .gaussalg import GaussFactor, GaussianExpansion, GaussHermiteTerm


@dataclass(frozen=True)
class MolecularSystem:
    """Electron count plus nucleus positions and charges."""

    n_electrons: int
    nuclei: tuple  # of (position 3-vector, charge)

    def __post_init__(self):
        if self.n_electrons < 1:
            raise ValueError("need at least one electron")
        nuc = []
        for pos, charge in self.nuclei:
            p = np.asarray(pos, dtype=float)
            if p.shape != (3,) or not np.all(np.isfinite(p)):
                raise ValueError("nucleus position must be a finite 3-vector")
            if not charge > 0:
                raise ValueError("nucleus charge must be positive")
            nuc.append((p, float(charge)))
        object.__setattr__(self, "nuclei", tuple(nuc))

    @property
    def total_charge(self) -> float:
        return sum(z for _, z in self.nuclei)

    @property
    def n_nuclei(self) -> int:
        return len(self.nuclei)

    @property
    def interaction_count(self) -> int:
        n = self.n_electrons
        return self.n_nuclei * n + n * (n - 1) // 2

    @property
    def fanout(self) -> int:
        """M: four times the number of interaction terms."""
        return 4 * self.interaction_count


@dataclass(frozen=True)
class OperatorConfig:
    lam: float
    gamma: float
    h: float
    vartheta: float
    k_lo: int
    k_hi: int

    def __post_init__(self):
        if not self.lam < 0:
            raise ValueError("shift lambda must be negative")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0.0 < self.vartheta < 0.5:
            raise ValueError("vartheta must lie in (0, 1/2)")
        if not self.h > 0:
            raise ValueError("step h must be positive")
        if self.k_hi < self.k_lo:
            raise ValueError("empty k-range")


@dataclass(frozen=True)
class ContractionEstimate:
    alpha: float
    q: float
    operator_bound: float
    contractive: bool

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("decay rate q must lie in (0, 1)")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def theta_const(n_electrons: int, total_charge: float) -> float:
    """Hardy-type norm constant (2Z + N - 1) sqrt(N) of the potential."""
    if n_electrons < 1 or not total_charge > 0:
        raise ValueError("need N >= 1 and Z > 0")
    return (2.0 * total_charge + n_electrons - 1) * math.sqrt(n_electrons)


def kappa_theta(vartheta: float) -> float:
    t = vartheta
    return (1.0 / math.sqrt(math.pi)
            * ((2.0 + 2.0 * t) / math.e) ** (0.5 * (1.0 + t))
            * 2.0 / (t * (1.0 - 2.0 * t)))


def kappa_star(lam: float, vartheta: float) -> float:
    return max(1.0, (-vartheta / (lam * math.e)) ** vartheta)


def contraction_constants(cfg: OperatorConfig,
                          system: MolecularSystem) -> ContractionEstimate:
    """The H1 norm bound of the composed series, split into the pair-norm
    prefactor alpha and the geometric rate q = exp(-vartheta h / 2)."""
    t, h = cfg.vartheta, cfg.h
    n, z = system.n_electrons, system.total_charge
    alpha = (kappa_star(cfg.lam, t) * kappa_theta(t) * (t * h) ** 2
             * (2.0 * z + n - 1) * n ** (0.5 * (1.0 + t))
             / (4.0 * math.sqrt(2.0))) * cfg.gamma ** (0.5 - t)
    q = math.exp(-0.5 * t * h)
    bound = alpha * ((1.0 + q) / (1.0 - q)) ** 2
    return ContractionEstimate(alpha=alpha, q=q, operator_bound=bound,
                               contractive=bound < 1.0)


def default_k_range(h: float, lam: float, tail_tol: float = 1e-16,
                    r_interval: tuple = (1e-4, 1e4)) -> tuple:
    """Shared truncation range for the V_k and G_k families.

    Driven by the same tail logic as the one-dimensional kernel sums: the
    potential factors sample the beta=1/2 sum at r^2 for r in the given
    interval, the resolvent factors the beta=1 sum at |w|^2 - lambda.
    """
    r_lo, r_hi = r_interval
    lo_v, hi_v = expsum._tail_k_range(0.5, h, r_lo ** 2, r_hi ** 2, tail_tol)
    lo_g, hi_g = expsum._tail_k_range(1.0, h, -lam, r_hi ** 2 - lam, tail_tol)
    return min(lo_v, lo_g), max(hi_v, hi_g)


# ---------------------------------------------------------------------------
# operator applications


def _embed_block(n: int, i: int, scale: float) -> np.ndarray:
    """Precision acting as scale * I3 on electron block i of R^(3N)."""
    Q = np.zeros((3 * n, 3 * n))
    Q[3 * i:3 * i + 3, 3 * i:3 * i + 3] = scale * np.eye(3)
    return Q


def _pair_block(n: int, i: int, j: int, scale: float) -> np.ndarray:
    """Precision scale * (e_i - e_j)(e_i - e_j)^T kron I3."""
    v = np.zeros(n)
    v[i], v[j] = 1.0, -1.0
    return scale * np.kron(np.outer(v, v), np.eye(3))


def potential_factors(k: int, system: MolecularSystem,
                      cfg: OperatorConfig) -> list:
    """The KN nucleus factors and N(N-1)/2 pair factors of V_k."""
    n = system.n_electrons
    h = cfg.h
    w = h / math.sqrt(math.pi) * math.exp(0.5 * k * h)
    prec = 2.0 * math.exp(k * h)
    out = []
    for i in range(n):
        for pos, charge in system.nuclei:
            center = np.zeros(3 * n)
            center[3 * i:3 * i + 3] = pos
            out.append(GaussFactor(coeff=-charge * w, center=center,
                                   precision=_embed_block(n, i, prec)))
    for i in range(n):
        for j in range(i + 1, n):
            out.append(GaussFactor(coeff=w, center=np.zeros(3 * n),
                                   precision=_pair_block(n, i, j, prec)))
    return out


def apply_Vk(e: GaussianExpansion, k: int, system: MolecularSystem,
             cfg: OperatorConfig) -> GaussianExpansion:
    """Multiply by the k-th Gaussian slice of the Coulomb potential.

    Fans each input term out to one term per interaction (M/4 of them)."""
    if e.dim != 3 * system.n_electrons:
        raise ValueError("expansion dimension does not match the system")
    factors = potential_factors(k, system, cfg)
    terms = [gaussalg.product(t, f) for t in e.terms for f in factors]
    return GaussianExpansion(terms, e.n_electrons, e.degree_cap)


def apply_Gk(e: GaussianExpansion, k: int,
             cfg: OperatorConfig) -> GaussianExpansion:
    """One slice of the approximate inverse of -Delta - lambda.

    Scalar prefactor h exp(e^{kh} lambda + kh) followed by the Gaussian
    frequency multiplier of width 2 e^{kh}; term count and polynomial
    degree are unchanged.  The prefactor decays double-exponentially for
    large k and may underflow to an exact zero coefficient."""
    h = cfg.h
    ekh = math.exp(k * h)
    pref = h * math.exp(ekh * cfg.lam + k * h)
    alpha = 2.0 * ekh
    out = []
    for t in e.terms:
        if pref == 0.0:
            out.append(gaussalg.GaussHermiteTerm(
                coeff=0.0, center=t.center, precision=t.precision,
                poly=dict(t.poly), structured=t.structured))
            continue
        m = gaussalg.apply_gaussian_multiplier(t, alpha)
        out.append(replace(m, coeff=pref * m.coeff))
    return GaussianExpansion(out, e.n_electrons, e.degree_cap)


def apply_Q(e: GaussianExpansion, cfg: OperatorConfig) -> GaussianExpansion:
    """Low-pass smoothing: frequency multiplier exp(-gamma |w|^2)."""
    terms = [gaussalg.apply_gaussian_multiplier(t, 2.0 * cfg.gamma)
             for t in e.terms]
    return GaussianExpansion(terms, e.n_electrons, e.degree_cap)


def apply_P(e: GaussianExpansion, cfg: OperatorConfig) -> GaussianExpansion:
    """High-pass complement P = I - Q; doubles the term count."""
    q = apply_Q(e, cfg)
    neg = [replace(t, coeff=-t.coeff) for t in q.terms]
    return GaussianExpansion(e.terms + neg, e.n_electrons, e.degree_cap)


def drop_zero_terms(e: GaussianExpansion) -> GaussianExpansion:
    """Remove terms whose coefficient is an exact zero (underflow)."""
    kept = [t for t in e.terms if t.coeff != 0.0]
    return GaussianExpansion(kept, e.n_electrons, e.degree_cap)


def level_pairs(n: int, k_lo: int, k_hi: int) -> list:
    """All (k, l) with |k| + |l| = n inside the shared range, sorted."""
    out = []
    for k in range(-n, n + 1):
        rest = n - abs(k)
        for l in ({0} if rest == 0 else {-rest, rest}):
            if k_lo <= k <= k_hi and k_lo <= l <= k_hi:
                out.append((k, l))
    return sorted(out)


def pair_count(n: int) -> int:
    """Number of integer pairs (k, l) with |k| + |l| = n."""
    return max(1, 4 * n)


def apply_T_kl(e: GaussianExpansion, k: int, l: int,
               system: MolecularSystem, cfg: OperatorConfig) -> GaussianExpansion:
    """One composed block G_l P V_k; fans out by M/2."""
    return apply_Gk(apply_P(apply_Vk(e, k, system, cfg), cfg), l, cfg)


def apply_T_tilde(e: GaussianExpansion, cfg: OperatorConfig,
                  system: MolecularSystem, schedule=None,
                  allow_noncontractive: bool = False) -> GaussianExpansion:
    """Sum of the composed blocks over the truncation range.

    Levels n = |k| + |l| are accumulated in ascending order and pairs in
    lexicographic order within a level, which fixes the floating-point
    result.  A solver-provided schedule maps each level n to a term cap
    applied to the input expansion; levels without a cap entry are
    skipped entirely.
    """
    est = contraction_constants(cfg, system)
    if not est.contractive and not allow_noncontractive:
        raise ValueError(
            f"configuration is not contractive (bound {est.operator_bound:.3g});"
            " pass allow_noncontractive=True to override")
    total = GaussianExpansion([], e.n_electrons, e.degree_cap)
    n_max = max(abs(cfg.k_lo), abs(cfg.k_hi)) * 2
    for n in range(n_max + 1):
        if schedule is not None:
            cap = schedule.get(n, 0)
            if cap <= 0:
                continue
            head = GaussianExpansion(e.terms[:cap], e.n_electrons,
                                     e.degree_cap)
        else:
            head = e
        if not head.terms:
            continue
        for k, l in level_pairs(n, cfg.k_lo, cfg.k_hi):
            total = total + apply_T_kl(head, k, l, system, cfg)
    return drop_zero_terms(total)


# ---------------------------------------------------------------------------
# gamma selection


def gamma_threshold(cfg_like, system: MolecularSystem, r: float) -> float:
    """Right-hand side of the smoothing-width admissibility condition."""
    t, h = cfg_like.vartheta, cfg_like.h
    q1 = math.exp(-(1.0 / (r + 1.0)) * 0.5 * t * h)
    m = system.fanout
    return (1.0 / (2.0 * m ** r)) * ((1.0 - q1) / (1.0 + q1)) ** (2 * r + 2)


def _alpha_of_gamma(cfg_like, system: MolecularSystem, gamma: float) -> float:
    t, h = cfg_like.vartheta, cfg_like.h
    n, z = system.n_electrons, system.total_charge
    return (kappa_star(cfg_like.lam, t) * kappa_theta(t) * (t * h) ** 2
            * (2.0 * z + n - 1) * n ** (0.5 * (1.0 + t))
            / (4.0 * math.sqrt(2.0))) * gamma ** (0.5 - t)


def select_gamma(cfg_like, system: MolecularSystem, r: float,
                 tol: float = 1e-6) -> float:
    """Largest smoothing width gamma in (0,1) meeting the schedule
    admissibility condition, found by bisection.

    alpha is increasing in gamma, so the condition alpha(gamma) <= threshold
    has a unique crossing.  Also checks the weaker contraction-free
    condition sqrt(gamma) theta < 1 for context (returned gammas satisfy
    it by a wide margin in practice).
    """
    if r < 0:
        raise ValueError("approximation order r must be >= 0")
    thr = gamma_threshold(cfg_like, system, r)
    lo_limit = 1e-300

    def ok(g):
        return _alpha_of_gamma(cfg_like, system, g) <= thr

    if not ok(lo_limit):
        raise ValueError("no admissible smoothing width above 1e-300")
    if ok(1.0 - 1e-12):
        return 1.0 - 1e-12
    # alpha is a pure power of gamma, so bisect on the logarithm until the
    # bracket is relatively tight
    lo, hi = lo_limit, 1.0
    while hi / lo > 1.0 + tol:
        mid = math.sqrt(lo * hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def potential_expansion_bound(cfg: OperatorConfig,
                              system: MolecularSystem) -> float:
    """theta(N,Z) times the kernel-sum relative accuracy at beta = 1/2."""
    theta = theta_const(system.n_electrons, system.total_charge)
    return theta * expsum.error_bound(0.5, cfg.h)
