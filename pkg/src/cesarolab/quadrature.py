"""Quadrature helpers.

Two flavours are used throughout the package:

* ``adaptive_simpson`` -- classic recursive adaptive Simpson for scalar
  integrands that are smooth on the (open) interval.
* ``simpson_segment`` / ``simpson_segments`` -- composite Simpson with
  doubling, evaluating the integrand on whole numpy arrays at once.  These
  are what the norm computations use, with segment edges placed at every
  breakpoint of the (piecewise smooth) integrand.

Integrable endpoint singularities at the origin are handled by
``integrate_from_origin``: the interval is split dyadically toward 0 and the
remaining head is estimated by geometric extrapolation of the (eventually
geometric) cell sums.  For pure power singularities the cell ratio is exactly
constant, so the extrapolated head is exact up to the per-cell Simpson error.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ArgumentError


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-9, max_depth: int = 48) -> float:
    """Adaptive Simpson integral of a scalar function on [a, b].

    ``tol`` is an absolute tolerance; the usual 1/15 Richardson error
    estimate controls the recursion and the extrapolated value is returned.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)

    def simpson(fl, fm, fr, h):
        return h / 6.0 * (fl + 4.0 * fm + fr)

    def recurse(l, r, fl, fm, fr, whole, eps, depth):
        m = 0.5 * (l + r)
        lm = 0.5 * (l + m)
        rm = 0.5 * (m + r)
        flm = f(lm)
        frm = f(rm)
        left = simpson(fl, flm, fm, m - l)
        right = simpson(fm, frm, fr, r - m)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        return recurse(l, m, fl, flm, fm, left, 0.5 * eps, depth + 1) + recurse(
            m, r, fm, frm, fr, right, 0.5 * eps, depth + 1
        )

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 0)


def simpson_segment(fvec, a: float, b: float, tol: float = 1e-10, max_level: int = 14) -> float:
    """Composite Simpson with doubling on one smooth segment.

    ``fvec`` must accept a numpy array and return values elementwise.  The
    panel count doubles until two successive composite values agree to
    ``tol`` (absolute); the Richardson-extrapolated value is returned.
    """
    if b <= a:
        return 0.0
    n = 4
    x = np.linspace(a, b, n + 1)
    y = np.asarray(fvec(x), dtype=float)
    h = (b - a) / n
    prev = h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
    for _ in range(max_level):
        n *= 2
        xnew = np.linspace(a, b, n + 1)[1::2]
        ynew = np.asarray(fvec(xnew), dtype=float)
        yfull = np.empty(n + 1)
        yfull[0::2] = y
        yfull[1::2] = ynew
        h = (b - a) / n
        cur = h / 3.0 * (
            yfull[0] + yfull[-1] + 4.0 * yfull[1:-1:2].sum() + 2.0 * yfull[2:-1:2].sum()
        )
        if abs(cur - prev) <= 15.0 * tol:
            return cur + (cur - prev) / 15.0
        prev, y = cur, yfull
    return prev


def simpson_segments(fvec, edges, tol: float = 1e-10) -> float:
    """Sum of ``simpson_segment`` over consecutive pairs in ``edges``."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ArgumentError("need at least two segment edges")
    total = 0.0
    m = edges.size - 1
    for i in range(m):
        total += simpson_segment(fvec, edges[i], edges[i + 1], tol / max(m, 1))
    return total


def integrate_from_origin(
    fvec,
    b: float,
    tol: float = 1e-9,
    max_levels: int = 400,
) -> float:
    """Integral of ``fvec`` over (0, b] for integrands singular at 0.

    Dyadic cells [b/2^(k+1), b/2^k] are integrated by ``simpson_segment``
    until the geometric extrapolation of the remaining head is below
    ``tol``; the head estimate is added.  Diverging cell sums (ratio >= 1
    sustained) raise ``ArgumentError`` so callers can report divergence.
    """
    if b <= 0.0:
        return 0.0
    total = 0.0
    cell_tol = tol / (8.0 * max_levels)
    prev_term = None
    ratio = None
    hi = b
    for k in range(max_levels):
        lo = 0.5 * hi
        term = simpson_segment(fvec, lo, hi, cell_tol)
        total += term
        if prev_term is not None and prev_term > 0.0:
            ratio = term / prev_term
            if term <= tol * 1e-3 and ratio < 0.999:
                total += term * ratio / (1.0 - ratio)
                return total
            if k > 40 and ratio >= 0.999 and term > tol:
                raise ArgumentError("integrand not integrable at the origin")
        elif term == 0.0 and (prev_term == 0.0 or prev_term is None) and k > 4:
            return total
        prev_term = term
        hi = lo
    if ratio is not None and ratio < 0.999:
        total += prev_term * ratio / (1.0 - ratio)
        return total
    raise ArgumentError("origin splitting did not converge")


def geometric_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Log-spaced grid including both endpoints."""
    if not (0.0 < lo < hi) or n < 2:
        raise ArgumentError("need 0 < lo < hi and n >= 2")
    return np.exp(np.linspace(math.log(lo), math.log(hi), n))
