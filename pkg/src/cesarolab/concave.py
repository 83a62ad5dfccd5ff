"""Increasing concave generator functions and their derived objects.

A ``ConcaveFn`` is one of three parametric kinds:

* ``power(alpha)``            phi(t) = t**alpha, 0 < alpha <= 1
* ``affine(a, b)``            phi(t) = a + b*t, a, b >= 0 (a=1, b=0 is the
                              constant generator of the sup-average space)
* ``piecewise_linear(knots)`` linear interpolation through ascending knots,
                              extended beyond the last knot with the final
                              segment slope

Derived objects: the conjugate evaluator psi(t) = t/phi(t), the dilation
function dil(s) = sup_t phi(s*t)/phi(t) sampled on a finite grid, the
lower/upper dilation indices read off at the extreme grid dilations, and the
sup-of-averages constant sup_t phi(t)/t * int_0^t ds/phi(s) whose finiteness
characterises an upper index below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DegenerateError, DomainError
from .quadrature import geometric_grid, integrate_from_origin, simpson_segments

HALF_LINE = "half_line"
UNIT_INTERVAL = "unit_interval"

_VALIDATION_TOL = 1e-12


class ConcaveFn:
    """Increasing concave function on [0, oo) or [0, 1].

    Instances are immutable after construction and evaluate exactly for the
    power/affine kinds; the piecewise kind interpolates linearly between its
    knots.  Use the module-level factories ``power``, ``affine`` and
    ``piecewise_linear``.
    """

    __slots__ = ("kind", "domain", "alpha", "a", "b", "knot_t", "knot_v", "_slopes")

    def __init__(self, kind, domain, alpha=None, a=None, b=None, knots=None):
        if domain not in (HALF_LINE, UNIT_INTERVAL):
            raise ArgumentError(f"unknown domain {domain!r}")
        self.kind = kind
        self.domain = domain
        self.alpha = alpha
        self.a = a
        self.b = b
        self.knot_t = None
        self.knot_v = None
        self._slopes = None
        if kind == "power":
            if not (0.0 < alpha <= 1.0):
                raise ArgumentError("power exponent must lie in (0, 1]")
        elif kind == "affine":
            if a < 0.0 or b < 0.0 or (a == 0.0 and b == 0.0):
                raise ArgumentError("affine needs a, b >= 0 and not both zero")
        elif kind == "piecewise_linear":
            t = np.asarray([k[0] for k in knots], dtype=float)
            v = np.asarray([k[1] for k in knots], dtype=float)
            if t.size < 2:
                raise ArgumentError("need at least two knots")
            if t[0] != 0.0:
                raise ArgumentError("first knot must sit at t=0")
            if not np.all(np.isfinite(t)) or not np.all(np.isfinite(v)):
                raise ArgumentError("knots must be finite")
            if np.any(np.diff(t) <= 0.0):
                raise ArgumentError("knot abscissae must be strictly ascending")
            if v[0] < 0.0 or np.any(np.diff(v) < -_VALIDATION_TOL):
                raise ArgumentError("knot values must be nonnegative and nondecreasing")
            slopes = np.diff(v) / np.diff(t)
            if np.any(np.diff(slopes) > _VALIDATION_TOL * max(1.0, abs(slopes[0]))):
                raise ArgumentError("segment slopes must be nonincreasing (concavity)")
            if v[-1] <= 0.0:
                raise ArgumentError("function must be positive somewhere")
            self.knot_t = t
            self.knot_v = v
            self._slopes = slopes
        else:
            raise ArgumentError(f"unknown kind {kind!r}")

    # -- evaluation ------------------------------------------------------

    def _check_domain(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise DomainError("argument below 0")
        if self.domain == UNIT_INTERVAL and np.any(t > 1.0 + 1e-15):
            raise DomainError("argument beyond 1 on the unit interval")
        return t

    def __call__(self, t):
        scalar = np.isscalar(t)
        x = self._check_domain(t)
        if self.kind == "power":
            out = np.power(x, self.alpha)
        elif self.kind == "affine":
            out = self.a + self.b * x
        else:
            out = np.interp(x, self.knot_t, self.knot_v)
            beyond = x > self.knot_t[-1]
            if np.any(beyond):
                out = np.where(
                    beyond,
                    self.knot_v[-1] + self._slopes[-1] * (x - self.knot_t[-1]),
                    out,
                )
        return float(out) if scalar else out

    def derivative(self, t):
        """Slope at t (a.e. for the piecewise kind, right slope at knots)."""
        scalar = np.isscalar(t)
        x = self._check_domain(t)
        if self.kind == "power":
            out = self.alpha * np.power(x, self.alpha - 1.0)
        elif self.kind == "affine":
            out = np.full_like(x, self.b, dtype=float)
        else:
            idx = np.clip(np.searchsorted(self.knot_t, x, side="right") - 1, 0, len(self._slopes) - 1)
            out = self._slopes[idx]
        return float(out) if scalar else out

    # -- structural queries ----------------------------------------------

    @property
    def value_at_zero(self) -> float:
        if self.kind == "power":
            return 0.0
        if self.kind == "affine":
            return self.a
        return float(self.knot_v[0])

    @property
    def unbounded(self) -> bool:
        """True when phi(t) -> oo as t -> oo (half-line kinds only)."""
        if self.kind == "power":
            return True
        if self.kind == "affine":
            return self.b > 0.0
        return self._slopes[-1] > 0.0

    def inverse_integral_converges(self) -> bool:
        """Whether int_0 ds/phi(s) is finite near the origin."""
        if self.kind == "power":
            return self.alpha < 1.0
        if self.kind == "affine":
            return self.a > 0.0
        return self.knot_v[0] > 0.0

    def __repr__(self):
        if self.kind == "power":
            return f"ConcaveFn.power({self.alpha}, domain={self.domain!r})"
        if self.kind == "affine":
            return f"ConcaveFn.affine({self.a}, {self.b}, domain={self.domain!r})"
        return f"ConcaveFn.piecewise({len(self.knot_t)} knots, domain={self.domain!r})"


def power(alpha: float, domain: str = HALF_LINE) -> ConcaveFn:
    return ConcaveFn("power", domain, alpha=float(alpha))


def affine(a: float, b: float, domain: str = HALF_LINE) -> ConcaveFn:
    return ConcaveFn("affine", domain, a=float(a), b=float(b))


def piecewise_linear(knots, domain: str = HALF_LINE) -> ConcaveFn:
    return ConcaveFn("piecewise_linear", domain, knots=list(knots))


def load_concave(path, domain: str = HALF_LINE) -> ConcaveFn:
    """Load a piecewise-linear function from a two-column text file.

    The first line must be ``#concave v1``; further ``#`` lines are ignored.
    Non-concave or non-monotone data is rejected by the constructor.
    """
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != "#concave v1":
            raise ArgumentError("missing '#concave v1' header")
        knots = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ArgumentError(f"expected two columns, got {line!r}")
            knots.append((float(parts[0]), float(parts[1])))
    return piecewise_linear(knots, domain=domain)


# -- conjugate -----------------------------------------------------------


class PsiFn:
    """Evaluator for psi(t) = t/phi(t), with the right limit used at t=0.

    For concave phi with phi(0)=0 the quotient is nondecreasing, so the
    limit exists; it is stored in ``zero_limit`` together with a marker of
    how it was obtained.
    """

    __slots__ = ("phi", "zero_limit", "zero_limit_kind")

    def __init__(self, phi: ConcaveFn):
        if phi.kind == "power":
            self.zero_limit = 1.0 if phi.alpha == 1.0 else 0.0
            self.zero_limit_kind = "exact"
        elif phi.kind == "affine":
            if phi.a > 0.0:
                self.zero_limit = 0.0
            else:
                self.zero_limit = 1.0 / phi.b
            self.zero_limit_kind = "exact"
        else:
            if phi.knot_v[0] > 0.0:
                self.zero_limit = 0.0
            else:
                s0 = phi._slopes[0]
                if s0 <= 0.0:
                    raise DegenerateError("phi vanishes on an interval of positive length")
                self.zero_limit = 1.0 / s0
            self.zero_limit_kind = "right_limit"
        self.phi = phi

    def __call__(self, t):
        scalar = np.isscalar(t)
        x = np.asarray(t, dtype=float)
        vals = np.asarray(self.phi(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x > 0.0, x / np.where(vals > 0.0, vals, np.nan), self.zero_limit)
        if np.any(np.isnan(out)):
            raise DegenerateError("phi vanishes at a positive argument")
        return float(out) if scalar else out


def psi(phi: ConcaveFn) -> PsiFn:
    """Conjugate evaluator psi(t) = t/phi(t)."""
    return PsiFn(phi)


# -- dilation function and indices ---------------------------------------


def default_t_grid(phi: ConcaveFn, points: int = 241) -> np.ndarray:
    hi = 1.0 if phi.domain == UNIT_INTERVAL else 2.0**30
    return geometric_grid(2.0**-30, hi, points)


def dilation_function(phi: ConcaveFn, s: float, t_grid=None, variant: str = "full") -> float:
    """Grid maximum of phi(s*t)/phi(t).

    ``variant`` restricts the admissible t range: ``origin`` keeps
    t <= min(1, 1/s), ``infinity`` keeps t >= max(1, 1/s); ``full`` uses the
    whole grid (clipped so s*t stays inside the domain).
    """
    if s <= 0.0:
        raise ArgumentError("dilation factor must be positive")
    t = default_t_grid(phi) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise ArgumentError("empty dilation grid")
    if np.any(t <= 0.0):
        raise ArgumentError("dilation grid must be positive")
    if variant == "origin":
        t = t[t <= min(1.0, 1.0 / s)]
    elif variant == "infinity":
        t = t[t >= max(1.0, 1.0 / s)]
    elif variant != "full":
        raise ArgumentError(f"unknown variant {variant!r}")
    if phi.domain == UNIT_INTERVAL:
        t = t[(t <= 1.0) & (s * t <= 1.0)]
    if t.size == 0:
        raise ArgumentError("no admissible grid points for this dilation")
    num = np.asarray(phi(s * t), dtype=float)
    den = np.asarray(phi(t), dtype=float)
    good = den > 0.0
    if not np.any(good):
        raise DegenerateError("phi vanishes on the whole grid")
    return float(np.max(num[good] / den[good]))


@dataclass
class IndexEstimate:
    """Sampled lower/upper dilation indices.

    ``p_lower``/``q_upper`` are the log-ratios at the most extreme sampled
    dilations; the per-sample series and a two-point extrapolation in
    1/log(s) are kept for inspection.
    """

    p_lower: float
    q_upper: float
    grid_spec: str
    p_series: list = field(default_factory=list)
    q_series: list = field(default_factory=list)
    p_extrapolated: float = math.nan
    q_extrapolated: float = math.nan


def _log_ratio_series(phi, exponents, t_grid, variant):
    out = []
    for e in exponents:
        s = 2.0**e
        out.append(math.log(dilation_function(phi, s, t_grid, variant)) / math.log(s))
    return out


def estimate_indices(phi: ConcaveFn, t_grid=None, variant: str = "full") -> IndexEstimate:
    """Sample the dilation indices on log-spaced dilations.

    The lower index is read off at s = 2**-20, the upper at s = 2**20
    (grid values in between are recorded).  The extrapolated fields remove
    the leading 1/log(s) error term from the last two samples.
    """
    if t_grid is None:
        t_grid = default_t_grid(phi)
    q_exp = list(range(4, 21, 4))
    p_exp = [-e for e in q_exp]
    p_series = _log_ratio_series(phi, p_exp, t_grid, variant)
    q_series = _log_ratio_series(phi, q_exp, t_grid, variant)

    def extrapolate(exps, series):
        (e1, v1), (e2, v2) = (exps[-2], series[-2]), (exps[-1], series[-1])
        l1, l2 = abs(e1), abs(e2)
        return (l2 * v2 - l1 * v1) / (l2 - l1)

    return IndexEstimate(
        p_lower=p_series[-1],
        q_upper=q_series[-1],
        grid_spec=(
            "s = 2^(+-{4,8,12,16,20}), t grid "
            f"{len(np.asarray(t_grid))} log-spaced points, variant={variant}"
        ),
        p_series=p_series,
        q_series=q_series,
        p_extrapolated=extrapolate(p_exp, p_series),
        q_extrapolated=extrapolate(q_exp, q_series),
    )


# -- the sup-of-averages constant ----------------------------------------


@dataclass
class QSupResult:
    holds: bool
    best_C: float
    argmax_t: float = math.nan


def inverse_integral(phi: ConcaveFn, t: float, tol: float = 1e-9) -> float:
    """int_0^t ds/phi(s) with singularity-aware splitting at the origin."""
    if t <= 0.0:
        return 0.0
    if not phi.inverse_integral_converges():
        return math.inf

    def integrand(s):
        return 1.0 / np.asarray(phi(s), dtype=float)

    if phi.value_at_zero > 0.0:
        edges = [0.0]
        if phi.kind == "piecewise_linear":
            edges += [float(k) for k in phi.knot_t if 0.0 < k < t]
        edges.append(t)
        return simpson_segments(integrand, edges, tol)
    return integrate_from_origin(integrand, t, tol)


def check_q_less_one(phi: ConcaveFn, t_grid=None, tol: float = 1e-9) -> QSupResult:
    """Grid estimate of sup_t phi(t)/t * int_0^t ds/phi(s).

    A finite, grid-stable supremum is the computational surrogate for an
    upper dilation index strictly below one; a divergent integral reports
    ``holds=False`` with an infinite constant.  The estimate is a sampled
    quantity, not a proof.
    """
    if not phi.inverse_integral_converges():
        return QSupResult(holds=False, best_C=math.inf)
    if t_grid is None:
        hi = 1.0 if phi.domain == UNIT_INTERVAL else 2.0**15
        t_grid = geometric_grid(2.0**-15, hi, 31)
    best = -math.inf
    arg = math.nan
    for t in np.asarray(t_grid, dtype=float):
        val = phi(t) / t * inverse_integral(phi, float(t), tol)
        if val > best:
            best, arg = val, float(t)
    return QSupResult(holds=math.isfinite(best), best_C=float(best), argmax_t=arg)
