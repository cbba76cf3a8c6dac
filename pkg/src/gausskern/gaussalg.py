"""Closed algebra of anisotropic Gauss and Gauss-Hermite functions.

A term is  coeff * P(x - a) * exp(-1/2 (x-a).Q(x-a))  with Q symmetric
positive definite on R^(3N).  Products with positive-semidefinite
interaction factors, Fourier transforms, Gaussian frequency multipliers,
derivatives, and L2 / Sobolev inner products all stay inside this class
and are evaluated in closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _poly

DEFAULT_DEGREE_CAP = 4


class DegreeCapError(ValueError):
    pass


def _check_spd(Q: np.ndarray) -> np.ndarray:
    """Cholesky factor of Q; factorization failure is authoritative."""
    try:
        return np.linalg.cholesky(Q)
    except np.linalg.LinAlgError as exc:
        raise ValueError("precision matrix is not SPD") from exc


def is_structured(Q: np.ndarray, atol: float = 0.0) -> bool:
    """True if Q equals Q' kron I3 for some N x N matrix Q'."""
    d = Q.shape[0]
    n = d // 3
    B = Q.reshape(n, 3, n, 3)
    Qp = B[:, 0, :, 0]
    return np.allclose(B, np.einsum("ik,ab->iakb", Qp, np.eye(3)), atol=atol,
                       rtol=1e-14)


@dataclass(frozen=True)
class GaussHermiteTerm:
    coeff: float
    center: np.ndarray
    precision: np.ndarray
    poly: dict = None  # multi-index (len 3N) -> coeff, polynomial in x - center
    structured: bool = False

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        Q = np.asarray(self.precision, dtype=float)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "precision", Q)
        if Q.shape != (c.size, c.size):
            raise ValueError("precision/center dimension mismatch")
        asym = np.abs(Q - Q.T).max() if Q.size else 0.0
        if asym > 1e-12 * (1.0 + np.abs(Q).max()):
            raise ValueError("precision matrix must be symmetric")
        _check_spd(Q)
        if self.poly is None:
            object.__setattr__(self, "poly", _poly.constant(c.size))
        if not math.isfinite(self.coeff):
            raise ValueError("coefficient must be finite")

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def degree(self) -> int:
        return _poly.degree(self.poly)

    def __call__(self, x: np.ndarray) -> float:
        y = np.asarray(x, dtype=float) - self.center
        L = np.linalg.cholesky(self.precision)
        z = L.T @ y
        return self.coeff * _poly.evaluate(self.poly, y) * math.exp(-0.5 * z @ z)


@dataclass(frozen=True)
class GaussFactor:
    """Unnormalized Gaussian interaction factor with PSD precision."""

    coeff: float
    center: np.ndarray
    precision: np.ndarray
    structured: bool = True

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        Q = np.asarray(self.precision, dtype=float)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "precision", Q)
        asym = np.abs(Q - Q.T).max() if Q.size else 0.0
        if asym > 1e-12 * (1.0 + np.abs(Q).max()):
            raise ValueError("precision matrix must be symmetric")
        w = np.linalg.eigvalsh(Q)
        if w.size and w[0] < -1e-12 * max(1.0, w[-1]):
            raise ValueError("factor precision must be PSD")

    @property
    def dim(self) -> int:
        return self.center.size

    def __call__(self, x: np.ndarray) -> float:
        y = np.asarray(x, dtype=float) - self.center
        return self.coeff * math.exp(-0.5 * y @ self.precision @ y)


@dataclass
class GaussianExpansion:
    terms: list
    n_electrons: int
    degree_cap: int = DEFAULT_DEGREE_CAP

    def __post_init__(self):
        d = 3 * self.n_electrons
        for t in self.terms:
            if t.dim != d:
                raise ValueError("term dimension does not match 3N")
            if t.degree > self.degree_cap:
                raise DegreeCapError(
                    f"term degree {t.degree} exceeds cap {self.degree_cap}")

    @property
    def dim(self) -> int:
        return 3 * self.n_electrons

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "GaussianExpansion") -> "GaussianExpansion":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return GaussianExpansion(self.terms + other.terms, self.n_electrons,
                                 max(self.degree_cap, other.degree_cap))

    def scaled(self, s: float) -> "GaussianExpansion":
        return GaussianExpansion(
            [replace(t, coeff=s * t.coeff) for t in self.terms],
            self.n_electrons, self.degree_cap)


def expansion_of(term: GaussHermiteTerm, n_electrons: int = None,
                 degree_cap: int = DEFAULT_DEGREE_CAP) -> GaussianExpansion:
    n = term.dim // 3 if n_electrons is None else n_electrons
    return GaussianExpansion([term], n, degree_cap)


# ---------------------------------------------------------------------------
# products


def product(t: GaussHermiteTerm, f) -> GaussHermiteTerm:
    """Multiply a term by a Gauss factor (or a second SPD term).

    Completing the square: Q = Q_t + Q_f and
    a = Q^{-1} (Q_t a_t + Q_f a_f); the polynomial is re-centered by a
    multivariate binomial shift, so the degree is unchanged (or adds,
    for a term-times-term product).
    """
    if t.dim != f.dim:
        raise ValueError("dimension mismatch")
    Q = t.precision + f.precision
    L = _check_spd(Q)
    rhs = t.precision @ t.center + f.precision @ f.center
    a = np.linalg.solve(Q, rhs)
    expo = -0.5 * (t.center @ t.precision @ t.center
                   + f.center @ f.precision @ f.center
                   - a @ Q @ a)
    coeff = t.coeff * f.coeff * math.exp(expo)
    poly = _poly.shift(t.poly, a - t.center)
    if isinstance(f, GaussHermiteTerm):
        poly = _poly.mul(poly, _poly.shift(f.poly, a - f.center))
    return GaussHermiteTerm(coeff=coeff, center=a, precision=Q, poly=poly,
                            structured=t.structured and f.structured)


# ---------------------------------------------------------------------------
# Fourier transform (unitary convention)


@dataclass(frozen=True)
class FourierGaussHermite:
    """scale * poly(w) * exp(-i a.w) * exp(-1/2 w.S w), poly complex."""

    scale: float
    poly: dict
    center: np.ndarray
    precision_inv: np.ndarray  # S = Q^{-1}

    @property
    def dim(self) -> int:
        return self.center.size

    def __call__(self, w: np.ndarray) -> complex:
        w = np.asarray(w, dtype=float)
        return (self.scale * _poly.evaluate(self.poly, w)
                * np.exp(-1j * self.center @ w)
                * math.exp(-0.5 * w @ self.precision_inv @ w))

    def eval_batch(self, W: np.ndarray) -> np.ndarray:
        W = np.asarray(W, dtype=float)
        quad = 0.5 * np.einsum("ni,ij,nj->n", W, self.precision_inv, W)
        return (self.scale * _poly.evaluate_batch(self.poly, W)
                * np.exp(-1j * (W @ self.center) - quad))


def _derivative_polys(S: np.ndarray, alpha: tuple) -> dict:
    """Polynomial part of D^alpha exp(-1/2 w.S w), sharing the Gaussian."""
    p = _poly.constant(S.shape[0])
    for i, ai in enumerate(alpha):
        for _ in range(ai):
            # d/dw_i [p e^{-q}] = (dp/dw_i - p (S w)_i) e^{-q}
            p = _poly.add(_poly.diff(p, i), _poly.mul_linear(p, -S[i]))
    return p


def fourier(t: GaussHermiteTerm) -> FourierGaussHermite:
    """Analytic Fourier transform of a Gauss-Hermite term.

    Polynomial factors turn into derivatives of the transformed Gaussian,
    which keep the representation in the same class with an omega
    polynomial of the same total degree.
    """
    L = _check_spd(t.precision)
    det_sqrt = float(np.prod(np.diag(L)))
    S = np.linalg.inv(t.precision)
    poly_w: dict = {}
    for alpha, c in t.poly.items():
        dp = _derivative_polys(S, alpha)
        phase = 1j ** sum(alpha)
        poly_w = _poly.add(poly_w, _poly.scale(dp, phase * c))
    return FourierGaussHermite(scale=t.coeff / det_sqrt, poly=poly_w,
                               center=t.center.copy(), precision_inv=S)


def inverse_fourier(rep: FourierGaussHermite,
                    structured: bool = False) -> GaussHermiteTerm:
    """Map a Fourier representation back to a real Gauss-Hermite term."""
    S = rep.precision_inv
    Q = np.linalg.inv(S)
    Q = 0.5 * (Q + Q.T)
    L = _check_spd(S)
    det_sqrt_S = float(np.prod(np.diag(L)))
    poly_y: dict = {}
    for alpha, c in rep.poly.items():
        # F^{-1}[w^alpha v] = (-i)^{|alpha|} D^alpha F^{-1}[v]
        dp = _derivative_polys(Q, alpha)
        poly_y = _poly.add(poly_y, _poly.scale(dp, (-1j) ** sum(alpha) * c))
    # the i-powers of a transform/inverse pair cancel; enforce realness
    real_poly = {}
    scale_abs = max((abs(c) for c in poly_y.values()), default=1.0)
    for a, c in poly_y.items():
        c = complex(c)
        if abs(c.imag) > 1e-10 * max(scale_abs, abs(c)):
            raise ValueError("inverse transform produced a non-real term")
        if c.real != 0.0:
            real_poly[a] = c.real
    return GaussHermiteTerm(coeff=rep.scale / det_sqrt_S, center=rep.center.copy(),
                            precision=Q, poly=real_poly, structured=structured)


def apply_gaussian_multiplier(t: GaussHermiteTerm, alpha: float) -> GaussHermiteTerm:
    """Apply the Fourier multiplier exp(-1/2 alpha |w|^2).

    Pure Gaussians transform by the closed determinant formula; terms with
    a polynomial part go through the Fourier domain, which preserves the
    polynomial degree and the structured block pattern.
    """
    if alpha < 0.0:
        raise ValueError("multiplier width alpha must be >= 0")
    if alpha == 0.0:
        return t
    d = t.dim
    M = np.eye(d) + alpha * t.precision
    if t.degree == 0:
        Qnew = np.linalg.solve(M, t.precision)
        Qnew = 0.5 * (Qnew + Qnew.T)
        coeff = t.coeff * t.poly.get((0,) * d, 0.0) \
            / math.sqrt(np.linalg.det(M))
        return GaussHermiteTerm(coeff=coeff, center=t.center.copy(),
                                precision=Qnew, poly=None,
                                structured=t.structured)
    rep = fourier(t)
    rep2 = FourierGaussHermite(scale=rep.scale, poly=rep.poly,
                               center=rep.center,
                               precision_inv=rep.precision_inv + alpha * np.eye(d))
    return inverse_fourier(rep2, structured=t.structured)


# ---------------------------------------------------------------------------
# derivatives


def gradient_term(t: GaussHermiteTerm, i: int) -> GaussHermiteTerm:
    """Partial derivative along coordinate i (degree + 1 term)."""
    p = _poly.add(_poly.diff(t.poly, i), _poly.mul_linear(t.poly, -t.precision[i]))
    return replace(t, poly=p)


def laplacian(e: GaussianExpansion) -> GaussianExpansion:
    """Analytic Laplacian; raises the polynomial degree by two."""
    out = []
    for t in e.terms:
        Q = t.precision
        p = t.poly
        acc: dict = {}
        for i in range(t.dim):
            pi = _poly.add(_poly.diff(p, i), _poly.mul_linear(p, -Q[i]))
            pii = _poly.add(_poly.diff(pi, i), _poly.mul_linear(pi, -Q[i]))
            acc = _poly.add(acc, pii)
        out.append(replace(t, poly=acc))
    cap = e.degree_cap
    if any(_poly.degree(t.poly) > cap for t in out):
        raise DegreeCapError("Laplacian exceeds the polynomial degree cap; "
                             "raise degree_cap or avoid the residual route")
    return GaussianExpansion(out, e.n_electrons, cap)


# ---------------------------------------------------------------------------
# inner products


def l2_inner(s: GaussHermiteTerm, t: GaussHermiteTerm) -> float:
    """Exact L2 inner product via Gaussian even-moment reduction."""
    if s.dim != t.dim:
        raise ValueError("dimension mismatch")
    p = product(s, t)
    d = p.dim
    L = np.linalg.cholesky(p.precision)
    det_sqrt = float(np.prod(np.diag(L)))
    base = (2.0 * math.pi) ** (0.5 * d) / det_sqrt
    if p.degree == 0:
        return p.coeff * p.poly.get((0,) * d, 0.0) * base
    sigma = np.linalg.inv(p.precision)
    return p.coeff * base * _poly.gaussian_moments(p.poly, sigma)


def _pairwise(e1: GaussianExpansion, e2: GaussianExpansion, term_inner) -> float:
    total = 0.0
    for s in e1.terms:
        for t in e2.terms:
            total += term_inner(s, t)
    return total


def _all_degree_zero(e: GaussianExpansion) -> bool:
    return all(t.degree == 0 for t in e.terms)


def _pack(e: GaussianExpansion):
    d = e.dim
    c = np.array([t.coeff * t.poly[(0,) * d] for t in e.terms])
    a = np.stack([t.center for t in e.terms])
    Q = np.stack([t.precision for t in e.terms])
    return c, a, Q


def _batched_gram(e1, e2, order1: bool):
    """Cross sums of L2 (and optionally gradient) inner products for
    degree-0 expansions, vectorized over term pairs in row blocks to
    keep the intermediate (rows, n2, d, d) arrays bounded."""
    tot_l2, tot_grad = 0.0, 0.0
    for l2b, gb in _gram_blocks(e1, e2, order1):
        tot_l2 += float(l2b.sum())
        tot_grad += float(gb.sum()) if order1 else 0.0
    return tot_l2, tot_grad


def _gram_blocks(e1, e2, order1: bool):
    """Yield (L2 block, gradient block) matrices over row chunks of e1."""
    c1f, a1f, Q1f = _pack(e1)
    c2, a2, Q2 = _pack(e2)
    n2 = len(c2)
    rows = max(1, int(2_000_000 // max(n2, 1)))
    for start in range(0, len(c1f), rows):
        yield _gram_block(c1f[start:start + rows], a1f[start:start + rows],
                          Q1f[start:start + rows], c2, a2, Q2, e1.dim, order1)


def _gram_block(c1, a1, Q1, c2, a2, Q2, d, order1: bool):
    Qs = Q1[:, None] + Q2[None, :]                       # (n1,n2,d,d)
    rhs = np.einsum("iab,ib->ia", Q1, a1)[:, None] + \
        np.einsum("jab,jb->ja", Q2, a2)[None, :]
    m = np.linalg.solve(Qs, rhs[..., None])[..., 0]      # joint centers
    quad = (np.einsum("ia,iab,ib->i", a1, Q1, a1)[:, None]
            + np.einsum("ja,jab,jb->j", a2, Q2, a2)[None, :]
            - np.einsum("...a,...ab,...b->...", m, Qs, m))
    base = ((2.0 * math.pi) ** (0.5 * d) / np.sqrt(np.linalg.det(Qs))
            * np.exp(-0.5 * quad) * c1[:, None] * c2[None, :])
    if not order1:
        return base, None
    # <grad s, grad t> = [tr(Q1 Qs^{-1} Q2) - |Q1 (m - a1)|^2] * base
    inv = np.linalg.inv(Qs)
    tr = np.einsum("iab,ijbc,jca->ij", Q1, inv, Q2)
    hmm = np.einsum("iab,ijb->ija", Q1, m - a1[:, None])
    grad = (tr - np.einsum("ija,ija->ij", hmm, hmm)) * base
    return base, grad


def gram_matrix(e1: GaussianExpansion, e2: GaussianExpansion,
                order: int = 1) -> np.ndarray:
    """Matrix of pairwise Sobolev inner products between term lists."""
    if order not in (0, 1):
        raise ValueError("gram_matrix supports orders 0 and 1")
    if _all_degree_zero(e1) and _all_degree_zero(e2):
        blocks = []
        for l2b, gb in _gram_blocks(e1, e2, order == 1):
            blocks.append(l2b + gb if order == 1 else l2b)
        return np.concatenate(blocks, axis=0)
    out = np.zeros((len(e1.terms), len(e2.terms)))
    for i, s in enumerate(e1.terms):
        si = GaussianExpansion([s], e1.n_electrons, e1.degree_cap)
        for j, t in enumerate(e2.terms):
            tj = GaussianExpansion([t], e2.n_electrons, e2.degree_cap)
            out[i, j] = sobolev_inner(si, tj, order)
    return out


def expansion_l2_inner(e1: GaussianExpansion, e2: GaussianExpansion) -> float:
    if e1.dim != e2.dim:
        raise ValueError("dimension mismatch")
    if not e1.terms or not e2.terms:
        return 0.0
    if _all_degree_zero(e1) and _all_degree_zero(e2):
        return _batched_gram(e1, e2, order1=False)[0]
    return _pairwise(e1, e2, l2_inner)


def seminorm_inner(e1: GaussianExpansion, e2: GaussianExpansion,
                   order: int) -> float:
    """|.|_order inner product for order in {0, 1, 2}."""
    if order == 0:
        return expansion_l2_inner(e1, e2)
    if order == 1:
        if not e1.terms or not e2.terms:
            return 0.0
        if _all_degree_zero(e1) and _all_degree_zero(e2):
            return _batched_gram(e1, e2, order1=True)[1]
        total = 0.0
        for i in range(e1.dim):
            g1 = [gradient_term(t, i) for t in e1.terms]
            g2 = [gradient_term(t, i) for t in e2.terms]
            for s in g1:
                for t in g2:
                    total += l2_inner(s, t)
        return total
    if order == 2:
        cap = max(e1.degree_cap, e2.degree_cap) + 2
        l1 = laplacian(GaussianExpansion(e1.terms, e1.n_electrons, cap))
        l2e = laplacian(GaussianExpansion(e2.terms, e2.n_electrons, cap))
        return expansion_l2_inner(l1, l2e)
    raise ValueError("seminorm order must be 0, 1 or 2")


def sobolev_inner(e1: GaussianExpansion, e2: GaussianExpansion,
                  order: int) -> float:
    """Integer-order Sobolev inner product with Fourier weight
    (1 + |w|^2)^order, i.e. binomial sums of the seminorm parts."""
    if order not in (0, 1, 2):
        raise ValueError("Sobolev order must be 0, 1 or 2")
    total = 0.0
    for j in range(order + 1):
        total += math.comb(order, j) * seminorm_inner(e1, e2, j)
    return total


def h1_norm(e: GaussianExpansion) -> float:
    return math.sqrt(max(sobolev_inner(e, e, 1), 0.0))


def term_h1_norms(e: GaussianExpansion) -> np.ndarray:
    """H1 norm of each individual term (coefficient included)."""
    if not e.terms:
        return np.zeros(0)
    if _all_degree_zero(e):
        c, a, Q = _pack(e)
        d = e.dim
        det = np.linalg.det(2.0 * Q)
        base = (2.0 * math.pi) ** (0.5 * d) / np.sqrt(det) * c * c
        trq = 0.5 * np.trace(Q, axis1=1, axis2=2)
        return np.sqrt(base * (1.0 + trq))
    out = np.zeros(len(e.terms))
    for i, t in enumerate(e.terms):
        sub = GaussianExpansion([t], e.n_electrons, e.degree_cap)
        out[i] = h1_norm(sub)
    return out


# ---------------------------------------------------------------------------
# evaluation, pruning, serialization


def evaluate(e: GaussianExpansion, x: np.ndarray) -> float:
    return float(sum(t(x) for t in e.terms))


def evaluate_batch(e: GaussianExpansion, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    d = X.shape[1]
    const_key = (0,) * d
    out = np.zeros(X.shape[0])
    for t in e.terms:
        Y = X - t.center
        quad = 0.5 * np.sum((Y @ t.precision) * Y, axis=1)
        if len(t.poly) == 1 and const_key in t.poly:
            p = np.real(t.poly[const_key])
        else:
            p = np.real(_poly.evaluate_batch(t.poly, Y))
        out += t.coeff * p * np.exp(-quad)
    return out


def prune(e: GaussianExpansion, budget: float) -> GaussianExpansion:
    """Drop a maximal set of smallest-norm terms whose individual H1 norms
    sum to at most budget; the triangle inequality certifies
    ||e - prune(e)||_1 <= budget."""
    if budget < 0.0:
        raise ValueError("budget must be >= 0")
    if not e.terms:
        return e
    norms = term_h1_norms(e)
    order = np.argsort(norms, kind="stable")
    dropped, total = set(), 0.0
    for idx in order:
        if total + norms[idx] <= budget:
            total += norms[idx]
            dropped.add(int(idx))
        else:
            break
    kept = [t for i, t in enumerate(e.terms) if i not in dropped]
    return GaussianExpansion(kept, e.n_electrons, e.degree_cap)


def compress(e: GaussianExpansion, max_terms: int,
             budget: float = 0.0) -> GaussianExpansion:
    """Re-expand e over its own dominant terms by H1 least squares.

    Simple norm-based pruning cannot exploit cancellation between
    heavily overlapping terms; this projection can.  The largest-norm
    terms (after merging exact duplicates of center, precision and
    polynomial) form the basis, their coefficients are re-fitted to
    minimize the H1 distance to the full expansion, and the achieved
    error is certified from the normal equations.  Raises if the error
    exceeds the budget (budget 0 disables the check).
    """
    if max_terms < 1:
        raise ValueError("need at least one basis term")
    if len(e.terms) <= max_terms:
        return e
    merged: dict = {}
    for t in e.terms:
        key = (t.center.tobytes(), t.precision.tobytes(),
               tuple(sorted(t.poly.items())))
        if key in merged:
            merged[key] = replace(merged[key], coeff=merged[key].coeff + t.coeff)
        else:
            merged[key] = t
    terms = [t for t in merged.values() if t.coeff != 0.0]
    e = GaussianExpansion(terms, e.n_electrons, e.degree_cap)
    if len(e.terms) <= max_terms:
        return e
    norms = term_h1_norms(e)
    order = np.argsort(-norms, kind="stable")[:max_terms]
    # basis of unit-H1-norm copies; a spectral cutoff in the normal
    # equations bounds the fitted coefficients, which would otherwise
    # explode for the nearly collinear width ladders produced by the
    # kernel sums
    basis = GaussianExpansion(
        [replace(e.terms[i], coeff=e.terms[i].coeff / norms[i])
         for i in order if norms[i] > 0.0],
        e.n_electrons, e.degree_cap)
    G = gram_matrix(basis, basis, order=1)
    # gram_matrix carries each term's coefficient, so summing the columns
    # gives <basis_i, e> directly
    B = gram_matrix(basis, e, order=1)
    b = B.sum(axis=1)
    w, V = np.linalg.eigh(0.5 * (G + G.T))
    keep = w > 1e-10 * w[-1]
    c = V[:, keep] @ ((V[:, keep].T @ b) / w[keep])
    if budget > 0.0:
        # the full Gram is the expensive part, so certify only on request
        full_sq = sobolev_inner(e, e, 1)
        err = math.sqrt(max(full_sq - 2.0 * c @ b + c @ G @ c, 0.0))
        if err > budget:
            raise ValueError(f"compression error {err:.3g} exceeds "
                             f"budget {budget:.3g}")
    out = [replace(t, coeff=ci * t.coeff) for t, ci in zip(basis.terms, c)
           if ci != 0.0]
    return GaussianExpansion(out, e.n_electrons, e.degree_cap)


def _tri_lower(Q: np.ndarray) -> list:
    d = Q.shape[0]
    return [Q[i, j] for i in range(d) for j in range(i + 1)]


def _from_tri_lower(vals: list, d: int) -> np.ndarray:
    Q = np.zeros((d, d))
    it = iter(vals)
    for i in range(d):
        for j in range(i + 1):
            Q[i, j] = Q[j, i] = next(it)
    return Q


def dump_expansion(e: GaussianExpansion, fh) -> None:
    """One JSON record per term; floats round-trip bit exactly."""
    header = {"n_electrons": e.n_electrons, "degree_cap": e.degree_cap}
    fh.write(json.dumps(header) + "\n")
    for t in e.terms:
        rec = {
            "coeff": t.coeff,
            "center": list(t.center),
            "precision": {"structured": t.structured,
                          "lower_triangle": _tri_lower(t.precision)},
            "poly": [{"multi_index": [int(v) for v in a], "coeff": c}
                     for a, c in sorted(t.poly.items())],
        }
        fh.write(json.dumps(rec) + "\n")


def load_expansion(fh) -> GaussianExpansion:
    lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    header = json.loads(lines[0])
    d = 3 * header["n_electrons"]
    terms = []
    for ln in lines[1:]:
        rec = json.loads(ln)
        terms.append(GaussHermiteTerm(
            coeff=rec["coeff"],
            center=np.array(rec["center"]),
            precision=_from_tri_lower(rec["precision"]["lower_triangle"], d),
            poly={tuple(p["multi_index"]): p["coeff"] for p in rec["poly"]},
            structured=rec["precision"]["structured"]))
    return GaussianExpansion(terms, header["n_electrons"], header["degree_cap"])
