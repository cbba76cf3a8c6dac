"""Multivariate polynomials as sparse multi-index dictionaries.

A polynomial in d variables is a dict mapping multi-index tuples of
length d to real (or complex) coefficients.  All functions are pure and
leave their arguments untouched.
"""

from __future__ import annotations

import numpy as np

Poly = dict  # tuple[int, ...] -> float | complex

_TINY = 0.0  # coefficients equal to zero are dropped eagerly


def constant(d: int, value=1.0) -> Poly:
    return {(0,) * d: value}


def degree(p: Poly) -> int:
    if not p:
        return 0
    return max(sum(a) for a in p)


def add(p: Poly, q: Poly, scale=1.0) -> Poly:
    out = dict(p)
    for a, c in q.items():
        v = out.get(a, 0.0) + scale * c
        if v == _TINY:
            out.pop(a, None)
        else:
            out[a] = v
    return out


def scale(p: Poly, s) -> Poly:
    if s == 0:
        return {}
    return {a: s * c for a, c in p.items()}


def mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for a, ca in p.items():
        for b, cb in q.items():
            key = tuple(x + y for x, y in zip(a, b))
            v = out.get(key, 0.0) + ca * cb
            if v == _TINY:
                out.pop(key, None)
            else:
                out[key] = v
    return out


def mul_linear(p: Poly, lin: np.ndarray, const=0.0) -> Poly:
    """Multiply by the affine form  lin . y + const."""
    d = len(lin)
    out: Poly = {}
    for a, c in p.items():
        if const != 0.0:
            out[a] = out.get(a, 0.0) + c * const
        for i in range(d):
            if lin[i] != 0.0:
                key = a[:i] + (a[i] + 1,) + a[i + 1:]
                out[key] = out.get(key, 0.0) + c * lin[i]
    return {a: c for a, c in out.items() if c != 0.0}


def diff(p: Poly, i: int) -> Poly:
    out: Poly = {}
    for a, c in p.items():
        if a[i] > 0:
            key = a[:i] + (a[i] - 1,) + a[i + 1:]
            out[key] = out.get(key, 0.0) + c * a[i]
    return out


def shift(p: Poly, delta: np.ndarray) -> Poly:
    """Re-express p(y) as a polynomial in z = y - delta, i.e. return
    r with r(z) = p(z + delta)."""
    d = len(delta)
    out: Poly = constant(d, 0.0)
    out = {}
    for a, c in p.items():
        # expand prod_i (z_i + delta_i)^{a_i} one variable at a time
        partial: Poly = {(0,) * d: c}
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            new: Poly = {}
            binom = _binomials(ai)
            for b, cb in partial.items():
                for j in range(ai + 1):
                    w = cb * binom[j] * delta[i] ** (ai - j)
                    if w == 0.0:
                        continue
                    key = b[:i] + (b[i] + j,) + b[i + 1:]
                    new[key] = new.get(key, 0.0) + w
            partial = new
        for b, cb in partial.items():
            v = out.get(b, 0.0) + cb
            out[b] = v
    return {a: c for a, c in out.items() if c != 0.0}


def evaluate(p: Poly, y: np.ndarray):
    total = 0.0
    for a, c in p.items():
        v = c
        for i, ai in enumerate(a):
            if ai:
                v = v * y[i] ** ai
        total = total + v
    return total


def evaluate_batch(p: Poly, Y: np.ndarray) -> np.ndarray:
    """Evaluate on an (n, d) array of points."""
    total = np.zeros(Y.shape[0], dtype=complex if any(
        isinstance(c, complex) for c in p.values()) else float)
    for a, c in p.items():
        v = np.full(Y.shape[0], c)
        for i, ai in enumerate(a):
            if ai:
                v = v * Y[:, i] ** ai
        total = total + v
    return total


def _binomials(n: int) -> list:
    row = [1]
    for _ in range(n):
        row = [1] + [row[i] + row[i + 1] for i in range(len(row) - 1)] + [1]
    return row


def gaussian_moments(p: Poly, sigma: np.ndarray) -> float:
    """Expectation of p(y) under the centered normal with covariance sigma.

    Wick/Isserlis recursion: E[y_i y^g] = sum_j sigma_ij g_j E[y^(g-e_j)].
    """
    cache: dict = {}

    def mom(a: tuple) -> float:
        t = sum(a)
        if t == 0:
            return 1.0
        if t % 2 == 1:
            return 0.0
        if a in cache:
            return cache[a]
        i = next(k for k, v in enumerate(a) if v > 0)
        g = a[:i] + (a[i] - 1,) + a[i + 1:]
        total = 0.0
        for j, gj in enumerate(g):
            if gj > 0:
                total += sigma[i, j] * gj * mom(g[:j] + (gj - 1,) + g[j + 1:])
        cache[a] = total
        return total

    return sum(c * mom(a) for a, c in p.items())
