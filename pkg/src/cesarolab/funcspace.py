"""Step functions on [0, 1] or a truncated half line, and their norms.

Everything is built around right-open step functions: the transforms used
here map steps to piecewise-analytic objects whose endpoint values, integrals
and distribution functions all have closed forms, so most norms are exact and
the few that need quadrature (norms of a prefix-average image in Lorentz or
weighted L_p) carry an explicit tolerance.

The prefix-average (Cesaro) image of a step function is piecewise
``c + beta/x``; its distribution function, level-set integrals and
integrated decreasing rearrangement K(t) = int_0^t (C|f|)* are computed in
closed form (plus one bisection for K), which is what the Marcinkiewicz- and
Lorentz-of-Cesaro norms are built on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .concave import ConcaveFn, HALF_LINE, UNIT_INTERVAL
from .errors import ArgumentError, DegenerateError, DomainError, RangeError
from .quadrature import integrate_from_origin, simpson_segment, simpson_segments

UNIT = "unit"
HALFLINE = "halfline"

DEFAULT_HORIZON = 2.0**16


# -- step functions --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StepFn:
    """Right-open step function vanishing beyond its last breakpoint."""

    breakpoints: np.ndarray
    values: np.ndarray
    domain: str = HALFLINE

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or vals.ndim != 1 or bp.size != vals.size + 1 or vals.size < 1:
            raise ArgumentError("need M+1 breakpoints for M >= 1 cell values")
        if bp[0] != 0.0 or np.any(np.diff(bp) <= 0.0):
            raise ArgumentError("breakpoints must start at 0 and increase strictly")
        if not np.all(np.isfinite(vals)):
            raise ArgumentError("cell values must be finite")
        if self.domain == UNIT:
            if bp[-1] > 1.0 + 1e-12:
                raise ArgumentError("unit-interval step function exceeds [0, 1]")
        elif self.domain != HALFLINE:
            raise ArgumentError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def support_end(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, x):
        scalar = np.isscalar(x)
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        out = np.where(
            (x < 0.0) | (x >= self.breakpoints[-1]),
            0.0,
            self.values[np.clip(idx, 0, self.values.size - 1)],
        )
        return float(out) if scalar else out

    def integral(self) -> float:
        return float(np.dot(self.values, np.diff(self.breakpoints)))

    def abs(self) -> "StepFn":
        return StepFn(self.breakpoints, np.abs(self.values), self.domain)

    def ess_sup(self, a: float, b: float) -> float:
        """Essential supremum of |f| on [a, b)."""
        if b <= a:
            return 0.0
        lo = np.searchsorted(self.breakpoints, a, side="right") - 1
        hi = np.searchsorted(self.breakpoints, b, side="left")
        lo = max(lo, 0)
        hi = min(hi, self.values.size)
        if hi <= lo:
            return 0.0
        return float(np.max(np.abs(self.values[lo:hi])))

    def to_json(self) -> dict:
        dom = "unit" if self.domain == UNIT else f"halfline:{self.support_end}"
        return {
            "breakpoints": [float(x) for x in self.breakpoints],
            "values": [float(v) for v in self.values],
            "domain": dom,
        }

    @staticmethod
    def from_json(obj) -> "StepFn":
        dom = obj.get("domain", "halfline")
        domain = UNIT if dom == "unit" else HALFLINE
        return StepFn(np.asarray(obj["breakpoints"]), np.asarray(obj["values"]), domain)


def indicator(a: float, b: float, domain: str = HALFLINE) -> StepFn:
    """Characteristic function of [a, b)."""
    if not (0.0 <= a < b):
        raise ArgumentError("need 0 <= a < b")
    if a == 0.0:
        return StepFn(np.array([0.0, b]), np.array([1.0]), domain)
    return StepFn(np.array([0.0, a, b]), np.array([0.0, 1.0]), domain)


def refine_edges(*fns) -> np.ndarray:
    edges = np.unique(np.concatenate([f.breakpoints for f in fns]))
    return edges


def resample(f: StepFn, edges: np.ndarray) -> np.ndarray:
    """Cell values of f on a refined edge grid (f zero beyond its support)."""
    mids = 0.5 * (edges[:-1] + edges[1:])
    return f(mids)


def majorant_fn(f: StepFn) -> StepFn:
    """Decreasing majorant: running max of |values| from the right."""
    vals = np.maximum.accumulate(np.abs(f.values)[::-1])[::-1]
    return StepFn(f.breakpoints, vals, f.domain)


def rearrange_fn(f: StepFn) -> StepFn:
    """Decreasing rearrangement: cells of |f| sorted by value, widths kept."""
    widths = np.diff(f.breakpoints)
    order = np.argsort(-np.abs(f.values), kind="stable")
    bp = np.concatenate([[0.0], np.cumsum(widths[order])])
    bp[-1] = f.breakpoints[-1]
    return StepFn(bp, np.abs(f.values)[order], f.domain)


# -- weights ---------------------------------------------------------------


class FuncWeight:
    """Positive weight on the half line with a closed-form cumulative.

    Kinds: ``ones`` (w = 1), ``power`` (w = coef * x**expo with expo > -1),
    ``step`` (a positive step function; cumulative is piecewise affine,
    constant beyond the support).  ``scale`` multiplies the weight.
    """

    __slots__ = ("kind", "coef", "expo", "step", "scale")

    def __init__(self, kind, coef=1.0, expo=0.0, step=None, scale=1.0):
        if kind not in ("ones", "power", "step"):
            raise ArgumentError(f"unknown weight kind {kind!r}")
        if kind == "power" and (expo <= -1.0 or coef <= 0.0):
            raise ArgumentError("power weight needs coef > 0 and expo > -1")
        if kind == "step":
            if step is None or np.any(np.asarray(step.values) <= 0.0):
                raise ArgumentError("step weight must be strictly positive on its support")
        self.kind = kind
        self.coef = float(coef)
        self.expo = float(expo)
        self.step = step
        self.scale = float(scale)

    @staticmethod
    def ones() -> "FuncWeight":
        return FuncWeight("ones")

    @staticmethod
    def power(coef: float, expo: float) -> "FuncWeight":
        return FuncWeight("power", coef=coef, expo=expo)

    @staticmethod
    def from_step(step: StepFn) -> "FuncWeight":
        return FuncWeight("step", step=step)

    def rescaled(self, factor: float) -> "FuncWeight":
        return FuncWeight(self.kind, self.coef, self.expo, self.step, self.scale * factor)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "ones":
            out = np.ones_like(x)
        elif self.kind == "power":
            out = self.coef * np.power(x, self.expo)
        else:
            out = self.step(x)
        return self.scale * out

    def cumulative(self, x):
        """W(x) = int_0^x w, exact."""
        scalar = np.isscalar(x)
        x = np.asarray(x, dtype=float)
        if self.kind == "ones":
            out = x.copy()
        elif self.kind == "power":
            q = self.expo + 1.0
            out = self.coef / q * np.power(x, q)
        else:
            bp = self.step.breakpoints
            widths = np.diff(bp)
            cums = np.concatenate([[0.0], np.cumsum(self.step.values * widths)])
            idx = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, widths.size - 1)
            out = cums[idx] + self.step.values[idx] * (np.clip(x, bp[0], bp[-1]) - bp[idx])
            out = np.where(x >= bp[-1], cums[-1], out)
        out = self.scale * out
        return float(out) if scalar else out

    @property
    def total(self) -> float:
        if self.kind == "step":
            return float(self.cumulative(self.step.support_end))
        return math.inf

    def describe(self) -> str:
        if self.kind == "ones":
            base = "w=1"
        elif self.kind == "power":
            base = f"w={self.coef}*x^{self.expo}"
        else:
            base = f"w=step({self.step.values.size} cells)"
        return base if self.scale == 1.0 else f"{base} scaled by {self.scale}"


# -- transforms ------------------------------------------------------------


class CesaroImage:
    """Exact evaluator for the prefix averages of |f|.

    On each cell [l, r) the image equals c + beta/x with beta fixed by the
    prefix integral; the image is continuous and, on the half line, decays
    like (total integral)/x beyond the support.  All level-set measures and
    their integrals are closed forms, which the norm code relies on.
    """

    __slots__ = ("l", "r", "c", "beta", "domain", "total", "support_end")

    def __init__(self, f: StepFn):
        f = f.abs()
        widths = np.diff(f.breakpoints)
        prefix = np.concatenate([[0.0], np.cumsum(f.values * widths)])
        l = f.breakpoints[:-1].copy()
        r = f.breakpoints[1:].copy()
        c = f.values.copy()
        beta = prefix[:-1] - c * l
        total = float(prefix[-1])
        end = f.support_end
        if f.domain == UNIT:
            if end < 1.0 and total > 0.0:
                l = np.append(l, end)
                r = np.append(r, 1.0)
                c = np.append(c, 0.0)
                beta = np.append(beta, total)
        else:
            if total > 0.0:
                l = np.append(l, end)
                r = np.append(r, math.inf)
                c = np.append(c, 0.0)
                beta = np.append(beta, total)
        keep = r > l
        self.l, self.r, self.c, self.beta = l[keep], r[keep], c[keep], beta[keep]
        self.domain = f.domain
        self.total = total
        self.support_end = end

    def __call__(self, x):
        scalar = np.isscalar(x)
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0.0):
            raise DomainError("prefix average defined for x > 0 only")
        if self.domain == UNIT and np.any(x > 1.0 + 1e-12):
            raise DomainError("argument beyond the unit interval")
        edges = np.append(self.l, self.r[-1])
        idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, self.c.size - 1)
        out = self.c[idx] + self.beta[idx] / x
        out = np.where(x >= self.r[-1], self.total / x, out)
        return float(out) if scalar else out

    def edge_values(self) -> np.ndarray:
        """Values at all cell endpoints (the image is continuous)."""
        vals = [self.c[0] if self.l[0] == 0.0 else self.c[0] + self.beta[0] / self.l[0]]
        for j in range(self.c.size):
            rj = self.r[j]
            vals.append(self.c[j] if math.isinf(rj) else self.c[j] + self.beta[j] / rj)
        return np.asarray(vals)

    def ess_sup(self) -> float:
        return float(np.max(self.edge_values()))

    def distribution(self, lam) -> np.ndarray:
        """Lebesgue measure of {x: C|f|(x) > lam}, vectorized over lam."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        out = np.zeros_like(lam)
        for j in range(self.c.size):
            l, r, c, b = self.l[j], self.r[j], self.c[j], self.beta[j]
            if b > 0.0:
                if math.isinf(r):
                    with np.errstate(divide="ignore"):
                        m = np.where(lam > c, np.maximum(b / (lam - c) - l, 0.0), math.inf)
                else:
                    with np.errstate(divide="ignore"):
                        m = np.where(
                            lam > c,
                            np.clip(b / (lam - c) - l, 0.0, r - l),
                            r - l,
                        )
            elif b < 0.0:
                with np.errstate(divide="ignore"):
                    cut = np.where(lam < c, b / (lam - c), r)
                m = r - np.clip(cut, l, r)
            else:
                m = np.where(lam < c, r - l, 0.0)
            out += m
        return out

    def tail_area(self, lam0) -> np.ndarray:
        """int_{lam0}^{inf} distribution(lam) dlam, closed form per cell."""
        lam0 = np.atleast_1d(np.asarray(lam0, dtype=float))
        out = np.zeros_like(lam0)
        for j in range(self.c.size):
            l, r, c, b = self.l[j], self.r[j], self.c[j], self.beta[j]
            if b > 0.0:
                vl = c + b / l if l > 0.0 else math.inf
                vr = c if math.isinf(r) else c + b / r
                lt = np.maximum(lam0, vr)
                if math.isinf(r):
                    # tail cell: c = 0, measure b/lam - l up to vl
                    with np.errstate(divide="ignore", invalid="ignore"):
                        part = b * np.log(vl / lt) - l * (vl - lt)
                    out += np.where(lt < vl, part, 0.0)
                else:
                    full = (r - l) * np.maximum(vr - lam0, 0.0)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        part = b * np.log((vl - c) / (lt - c)) - l * (vl - lt)
                    out += full + np.where(lt < vl, part, 0.0)
            elif b < 0.0:
                vl = c + b / l
                vr = c + b / r
                full = (r - l) * np.maximum(vl - lam0, 0.0)
                lt = np.maximum(lam0, vl)
                with np.errstate(divide="ignore", invalid="ignore"):
                    part = r * (vr - lt) - b * np.log((c - vr) / (c - lt))
                out += full + np.where(lt < vr, part, 0.0)
            else:
                out += (r - l) * np.maximum(c - lam0, 0.0)
        return out

    def rearranged_prefix(self, t, iters: int = 80) -> np.ndarray:
        """K(t) = int_0^t (C|f|)*, vectorized over t.

        Solved via the level parametrisation K(t) = t*lam + tail_area(lam)
        at the lam where the distribution equals t (bisection; the objective
        is flat at the solution so the bisection error enters second order).
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lmax = self.ess_sup()
        if lmax <= 0.0 or np.all(t <= 0.0):
            return np.zeros_like(t)
        hi = np.full_like(t, lmax)
        lo = np.full_like(t, lmax)
        saturated = np.zeros(t.shape, dtype=bool)
        for _ in range(200):
            need = (self.distribution(lo) < t) & ~saturated
            if not np.any(need):
                break
            lo = np.where(need, 0.5 * lo, lo)
            saturated |= need & (lo < 1e-280)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            below = self.distribution(mid) < t
            hi = np.where(below, mid, hi)
            lo = np.where(below, lo, mid)
        lam = 0.5 * (lo + hi)
        out = t * lam + self.tail_area(lam)
        if np.any(saturated):
            out = np.where(saturated, self.tail_area(np.zeros_like(t)), out)
        return out


def cesaro_fn(f: StepFn) -> CesaroImage:
    """Exact evaluator of the running average (1/x) int_0^x |f|."""
    return CesaroImage(f)


class CopsonImage:
    """Exact evaluator of the tail transform int_x |f(t)|/t dt."""

    __slots__ = ("f",)

    def __init__(self, f: StepFn):
        self.f = f.abs()

    def __call__(self, x):
        scalar = np.isscalar(x)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        bp, vals = self.f.breakpoints, self.f.values
        out = np.zeros_like(x)
        for j in range(vals.size):
            if vals[j] == 0.0:
                continue
            l, r = bp[j], bp[j + 1]
            lo = np.clip(x, l, r)
            with np.errstate(divide="ignore", invalid="ignore"):
                term = vals[j] * (np.log(r) - np.log(lo))
            out += np.where(x < r, term, 0.0)
        out = np.where(x >= bp[-1], 0.0, out)
        if scalar:
            return float(out[0])
        return out


def copson_fn(f: StepFn) -> CopsonImage:
    return CopsonImage(f)


# -- space specifications and base norms ------------------------------------

_FUNC_BASES = ("lp", "lorentz", "marcinkiewicz", "linf")


@dataclass(frozen=True)
class FuncSpaceSpec:
    """Function-space description mirroring the sequence one."""

    base: str
    p: float = math.nan
    phi: ConcaveFn = None
    weight: FuncWeight = None
    label: str = ""

    def __post_init__(self):
        if self.base not in _FUNC_BASES:
            raise ArgumentError(f"unknown base {self.base!r}")
        if self.base == "lp" and not (self.p >= 1.0):
            raise ArgumentError("p must satisfy p >= 1")
        if self.base in ("lorentz", "marcinkiewicz"):
            if self.phi is None:
                raise ArgumentError(f"{self.base} needs a concave generator")
            if self.base == "lorentz" and self.phi.value_at_zero != 0.0:
                raise ArgumentError("lorentz generator must vanish at 0")


def flp(p: float, weight: FuncWeight | None = None) -> FuncSpaceSpec:
    return FuncSpaceSpec("lp", p=float(p), weight=weight or FuncWeight.ones(), label=f"Lp:{p}")


def florentz(phi: ConcaveFn) -> FuncSpaceSpec:
    return FuncSpaceSpec("lorentz", phi=phi, label="Lorentz")


def fmarcinkiewicz(phi: ConcaveFn) -> FuncSpaceSpec:
    return FuncSpaceSpec("marcinkiewicz", phi=phi, label="Marcinkiewicz")


def flinf(weight: FuncWeight | None = None) -> FuncSpaceSpec:
    return FuncSpaceSpec("linf", p=math.inf, weight=weight or FuncWeight.ones(), label="Linf")


def _phi_domain_check(phi: ConcaveFn, f: StepFn):
    if f.domain == HALFLINE and phi.domain != HALF_LINE:
        raise ArgumentError("half-line step function needs a half-line generator")


def base_norm_fn(spec: FuncSpaceSpec, f: StepFn, refine: int = 64) -> float:
    """Norm in the untransformed base space.

    Exact for weighted L_p (cellwise closed form), Lorentz (Stieltjes sum
    over the rearrangement) and L_inf.  The Marcinkiewicz supremum is exact
    at breakpoints plus closed-form interior critical points for power and
    affine generators; for other generators a per-cell refinement with
    ``refine`` subsamples is used and the value is a certified lower bound.
    """
    if spec.base == "lp":
        w = spec.weight or FuncWeight.ones()
        if math.isinf(spec.p):
            return base_norm_fn(flinf(w), f)
        dW = np.diff(w.cumulative(f.breakpoints))
        return float(np.sum(np.abs(f.values) ** spec.p * dW) ** (1.0 / spec.p))
    if spec.base == "linf":
        w = spec.weight or FuncWeight.ones()
        if w.kind == "ones":
            return float(np.max(np.abs(f.values)))
        edges = f.breakpoints
        if w.kind == "step":
            edges = refine_edges(f, w.step)
            vals = np.abs(resample(f, edges))
            sups = w(0.5 * (edges[:-1] + edges[1:]))  # w constant per refined cell
        else:
            vals = np.abs(f.values)
            with np.errstate(divide="ignore"):
                # w monotone and continuous: cell sup at an endpoint
                sups = np.maximum(w(edges[:-1]), w(edges[1:]))
        return float(np.max(np.where(vals > 0.0, vals * sups, 0.0)))
    _phi_domain_check(spec.phi, f)
    star = rearrange_fn(f)
    if spec.base == "lorentz":
        dphi = np.diff(spec.phi(star.breakpoints))
        return float(np.dot(star.values, dphi))
    return _marcinkiewicz_of_star(spec.phi, star, refine)[0]


def marcinkiewicz_refinement_delta(phi: ConcaveFn, f: StepFn, refine: int = 64) -> float:
    """Gap between the refined supremum and the breakpoint-only one."""
    star = rearrange_fn(f)
    refined, coarse = _marcinkiewicz_of_star(phi, star, refine)
    return refined - coarse


def _marcinkiewicz_of_star(phi: ConcaveFn, star: StepFn, refine: int):
    """sup_t phi(t)/t * int_0^t f* for a nonincreasing step f*.

    Returns (refined value, breakpoint-only value).
    """
    bp = star.breakpoints
    vals = star.values
    widths = np.diff(bp)
    prefix = np.concatenate([[0.0], np.cumsum(vals * widths)])

    cands = [bp[1:]]
    for j in range(vals.size):
        l, r = bp[j], bp[j + 1]
        A, v = prefix[j], vals[j]
        if phi.kind == "power" and v > 0.0 and phi.alpha < 1.0:
            tstar = (1.0 - phi.alpha) * (A - v * l) / (phi.alpha * v)
            if l < tstar < r:
                cands.append(np.array([tstar]))
        elif phi.kind == "affine" and v > 0.0 and phi.b > 0.0:
            arg = phi.a * (A - v * l) / (phi.b * v)
            if arg > 0.0:
                tstar = math.sqrt(arg)
                if l < tstar < r:
                    cands.append(np.array([tstar]))
        if refine > 0 and r > l:
            cands.append(np.linspace(l, r, refine + 2)[1:-1])

    def value(ts):
        ts = ts[ts > 0.0]
        if ts.size == 0:
            return 0.0
        idx = np.clip(np.searchsorted(bp, ts, side="right") - 1, 0, vals.size - 1)
        P = prefix[idx] + vals[idx] * (ts - bp[idx])
        P = np.where(ts >= bp[-1], prefix[-1], P)
        return float(np.max(phi(ts) / ts * P))

    coarse = value(bp[1:])
    refined = max(coarse, max(value(c) for c in cands))
    if phi.value_at_zero > 0.0 and vals.size:
        refined = max(refined, phi.value_at_zero * float(vals[0]))
    return refined, coarse


# -- norms of the prefix-average image -------------------------------------


def ces_inf_norm_fn(f: StepFn, w: FuncWeight | None = None) -> float:
    """Sup of v(x) * C|f|(x) with v(x) = x/W(x), exact at endpoints.

    With w identically one this is the plain sup of the running average.
    The image cell functions and the cumulative W are both affine on a
    common refinement (or W is a power), so each cell supremum sits at an
    endpoint or at the single closed-form critical point.
    """
    w = w or FuncWeight.ones()
    img = cesaro_fn(f)
    if img.total == 0.0:
        return 0.0

    cands = [np.asarray([l for l in img.l if l > 0.0]), img.r[np.isfinite(img.r)]]
    if w.kind == "step":
        extra = w.step.breakpoints
        cands.append(extra[(extra > 0.0) & (extra < img.r[np.isfinite(img.r)].max())])
    if w.kind == "power" and w.expo != 0.0:
        q = w.expo + 1.0
        for j in range(img.c.size):
            cj, bj = img.c[j], img.beta[j]
            # d/dx (c x + beta) / x^q = 0 at x = q*beta / (c*(1-q))
            if cj > 0.0 and q != 1.0:
                x0 = q * bj / (cj * (1.0 - q))
                if img.l[j] < x0 < img.r[j]:
                    cands.append(np.asarray([x0]))
    if img.l[0] == 0.0 and img.c[0] > 0.0 and w.kind == "power" and w.expo > 0.0:
        # near 0 the product behaves like c1 * x**(-expo), unbounded
        return math.inf
    ts = np.unique(np.concatenate([c for c in cands if np.asarray(c).size]))
    vals = img(ts) * ts / w.cumulative(ts)
    return float(np.max(vals))


def lorentz_cesaro_norm(phi: ConcaveFn, f: StepFn, tol: float = 1e-9) -> float:
    """Lorentz norm of the prefix-average image via its distribution.

    Uses the layer-cake identity: the norm equals the integral of
    phi(distribution(lam)) over lam in (0, esssup].  On the half line the
    lam -> 0 end is singular and handled by dyadic splitting; divergence
    (generator with unit upper index) raises ``ArgumentError``.
    """
    _phi_domain_check(phi, f)
    img = cesaro_fn(f)
    if img.total == 0.0:
        return 0.0
    lmax = img.ess_sup()
    edges = np.unique(np.concatenate([img.edge_values(), [0.0, lmax]]))
    edges = edges[(edges >= 0.0) & (edges <= lmax)]

    def integrand(lam):
        return phi(img.distribution(lam))

    if f.domain == UNIT:
        return simpson_segments(integrand, edges, tol)
    pos = edges[edges > 0.0]
    first = pos[0] if pos.size else lmax
    head = integrate_from_origin(integrand, float(first), tol * 0.5)
    rest = simpson_segments(integrand, edges[edges >= first], tol * 0.5) if pos.size > 1 else 0.0
    return head + rest


def marcinkiewicz_cesaro_norm(
    phi: ConcaveFn,
    f: StepFn,
    extra_t=(),
    samples_per_segment: int = 17,
) -> float:
    """Marcinkiewicz norm of the prefix-average image.

    Evaluates phi(t)/t * K(t) with K the integrated decreasing
    rearrangement, over candidate t values generated from the image's level
    structure plus any caller-supplied ``extra_t``.  Because K is monotone
    in the function, evaluating a sum and its pieces over a shared candidate
    set preserves pointwise norm inequalities.
    """
    _phi_domain_check(phi, f)
    img = cesaro_fn(f)
    if img.total == 0.0:
        return 0.0
    ts = candidate_levels(img, samples_per_segment)
    if len(extra_t):
        ts = np.unique(np.concatenate([ts, np.asarray(extra_t, dtype=float)]))
    if f.domain == UNIT:
        ts = ts[(ts > 0.0) & (ts <= 1.0)]
        ts = np.unique(np.append(ts, 1.0))
    K = img.rearranged_prefix(ts)
    vals = phi(ts) / ts * K
    best = float(np.max(vals))
    if phi.value_at_zero > 0.0:
        best = max(best, phi.value_at_zero * img.ess_sup())
    return best


def candidate_levels(img: CesaroImage, samples_per_segment: int = 17) -> np.ndarray:
    """Candidate t values: distribution evaluated at level-edge samples."""
    edges = np.unique(img.edge_values())
    edges = edges[edges > 0.0]
    lams = [edges]
    lo = edges[0] * 1e-6
    for a, b in zip(np.concatenate([[lo], edges[:-1]]), edges):
        if b > a > 0.0:
            lams.append(np.exp(np.linspace(math.log(a), math.log(b), samples_per_segment)))
    lam = np.unique(np.concatenate(lams))
    ts = img.distribution(lam)
    ts = ts[np.isfinite(ts) & (ts > 0.0)]
    if img.domain == HALFLINE:
        ts = np.concatenate([ts, img.support_end * 2.0 ** np.arange(0, 24, 2.0)])
    return np.unique(ts)


def lp_cesaro_norm(p: float, f: StepFn, w: FuncWeight | None = None, tol: float = 1e-9) -> float:
    """Weighted L_p norm of the prefix-average image (quadrature per cell).

    On the half line the beyond-support tail decays like 1/x; for w = 1 it
    is integrated in closed form (finite only for p > 1).
    """
    if p < 1.0:
        raise ArgumentError("p must satisfy p >= 1")
    w = w or FuncWeight.ones()
    img = cesaro_fn(f)
    if img.total == 0.0:
        return 0.0

    def integrand(x):
        return img(x) ** p * w(x)

    finite_r = img.r[np.isfinite(img.r)]
    edges = np.unique(np.concatenate([img.l[img.l > 0.0], finite_r]))
    total = simpson_segments(integrand, np.concatenate([[0.0], edges]), tol)
    if f.domain == HALFLINE:
        if w.kind != "ones":
            raise ArgumentError("half-line Lp-of-average tails implemented for w = 1 only")
        L = float(finite_r.max())
        if p == 1.0:
            return math.inf
        total += img.total**p * L ** (1.0 - p) / (p - 1.0)
    return float(total ** (1.0 / p))


def cesaro_norm_fn(spec: FuncSpaceSpec, f: StepFn, tol: float = 1e-9) -> float:
    """Norm of f in the Cesaro space over the base described by ``spec``."""
    if spec.base == "linf":
        return ces_inf_norm_fn(f, spec.weight)
    if spec.base == "lorentz":
        return lorentz_cesaro_norm(spec.phi, f, tol)
    if spec.base == "marcinkiewicz":
        return marcinkiewicz_cesaro_norm(spec.phi, f)
    return lp_cesaro_norm(spec.p, f, spec.weight, tol)


def tandori_norm_fn(spec: FuncSpaceSpec, f: StepFn, refine: int = 64) -> float:
    """Norm of the decreasing majorant in the base space (exact step path)."""
    return base_norm_fn(spec, majorant_fn(f), refine)


# -- the weighted-L1 description of the Cesaro-Lorentz space on [0, 1] ------


def cesaro_lorentz_l1_weight(phi: ConcaveFn, t: float, tol: float = 1e-9) -> float:
    """The weight w(t) = int_0^{1-t} phi'(s)/(t+s) ds on (0, 1).

    Exact (closed form) for piecewise-linear and affine generators; for
    power generators the integrable singularity of phi' at the origin is
    split dyadically.
    """
    if not (0.0 < t < 1.0):
        raise DomainError("weight defined for t in (0, 1)")
    b = 1.0 - t
    if phi.kind == "piecewise_linear" or phi.kind == "affine":
        if phi.kind == "affine":
            seg_t = np.array([0.0, b])
            seg_slope = np.array([phi.b])
        else:
            seg_t = np.unique(np.clip(np.append(phi.knot_t, b), 0.0, b))
            idx = np.clip(np.searchsorted(phi.knot_t, seg_t[:-1], side="right") - 1, 0, len(phi._slopes) - 1)
            seg_slope = phi._slopes[idx]
        return float(np.sum(seg_slope * (np.log(t + seg_t[1:]) - np.log(t + seg_t[:-1]))))
    alpha = phi.alpha

    def integrand(s):
        return alpha * np.power(s, alpha - 1.0) / (t + s)

    if alpha == 1.0:
        return float(math.log((t + b) / t))
    return integrate_from_origin(integrand, b, tol)


def l1_weight_pairing(f: StepFn, phi: ConcaveFn, tol: float = 1e-8) -> float:
    """int_0^1 |f(t)| w(t) dt for the weight above, via one outer quadrature.

    Swapping the integration order gives an inner integral with a closed
    form for step f, leaving a single s-integral whose only singularities
    sit at s = 0 (from phi' and from the logarithm when f is nonzero at the
    origin); those are handled by dyadic splitting.
    """
    if f.domain != UNIT:
        raise ArgumentError("pairing defined on the unit interval")
    af = f.abs()
    bp, vals = af.breakpoints, af.values

    def inner(s):
        s = np.atleast_1d(s)
        cut = 1.0 - s
        total = np.zeros_like(s)
        for j in range(vals.size):
            if vals[j] == 0.0:
                continue
            lo = np.minimum(bp[j], cut)
            hi = np.minimum(bp[j + 1], cut)
            good = hi > lo
            with np.errstate(divide="ignore", invalid="ignore"):
                term = vals[j] * (np.log(hi + s) - np.log(lo + s))
            total += np.where(good, term, 0.0)
        return total

    def outer(s):
        return phi.derivative(s) * inner(s)

    kinks = np.unique(np.clip(1.0 - bp, 0.0, 1.0))
    kinks = kinks[kinks > 0.0]
    if phi.kind == "piecewise_linear":
        kk = phi.knot_t[(phi.knot_t > 0.0) & (phi.knot_t < 1.0)]
        kinks = np.unique(np.concatenate([kinks, kk]))
    first = kinks[0]
    head = integrate_from_origin(outer, float(first), tol * 0.5)
    rest = simpson_segments(outer, kinks, tol * 0.5) if kinks.size > 1 else 0.0
    return head + rest


# -- geometric partitions ----------------------------------------------------


@dataclass
class FuncPartition:
    """Partition points t_n with cellwise weight mass growing geometrically."""

    points: np.ndarray
    n_start: int
    ratio: float
    weight: FuncWeight
    scale_applied: float
    residuals: np.ndarray = field(default=None)
    weight_id: str = ""

    def cell(self, n: int):
        i = n - self.n_start
        return float(self.points[i]), float(self.points[i + 1])

    @property
    def n_end(self) -> int:
        return self.n_start + self.points.size - 2


def geometric_partition(w: FuncWeight, a: float, window: tuple, tol: float = 1e-12) -> FuncPartition:
    """Points t_n with int over [t_n, t_{n+1}) of the rescaled w equal to a^n.

    The weight is rescaled so that its unit-interval mass is 1/(a-1), which
    pins t_0 = 1 and makes the cumulative at t_n equal a^n/(a-1); each point
    is then a bracketed bisection on the cumulative.  Windows that would
    need more mass than the weight carries raise ``RangeError`` and list the
    attainable window.
    """
    if a <= 1.0:
        raise ArgumentError("ratio must exceed 1")
    lo_n, hi_n = int(window[0]), int(window[1])
    if hi_n < lo_n:
        raise ArgumentError("empty window")
    w0 = float(w.cumulative(1.0))
    if not (w0 > 0.0) or not math.isfinite(w0):
        raise ArgumentError("weight must have positive finite mass on [0, 1]")
    scale = 1.0 / ((a - 1.0) * w0)
    w = w.rescaled(scale)
    total = w.total
    targets = [a**n / (a - 1.0) for n in range(lo_n, hi_n + 2)]
    if targets[-1] >= total:
        attain = int(math.floor(math.log((a - 1.0) * total) / math.log(a))) - 1
        raise RangeError(
            f"window [{lo_n}, {hi_n}] not attainable; cumulative mass supports n <= {attain}"
        )

    def solve(target):
        lo, hi = 0.0, 1.0
        while w.cumulative(hi) < target:
            hi *= 2.0
            if hi > 1e300:
                raise RangeError("cumulative never reaches the target")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            val = w.cumulative(mid)
            if abs(val - target) <= tol * target:
                return mid
            if val < target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    pts = np.asarray([solve(tg) for tg in targets])
    masses = np.diff(w.cumulative(pts))
    residuals = masses - np.asarray([a**n for n in range(lo_n, hi_n + 1)])
    return FuncPartition(
        points=pts,
        n_start=lo_n,
        ratio=a,
        weight=w,
        scale_applied=scale,
        residuals=residuals,
        weight_id=w.describe(),
    )


def partition_oplus_norm(part: FuncPartition, f: StepFn, p: float) -> float:
    """(sum_n a^n * esssup(|f| on [t_n, t_{n+1}))^p)^(1/p); exact for steps."""
    if p < 1.0:
        raise ArgumentError("p must satisfy p >= 1")
    pts = part.points
    support = f.breakpoints[np.concatenate([[False], np.abs(f.values) > 0.0]) | np.concatenate([np.abs(f.values) > 0.0, [False]])]
    if support.size and (support.min() < pts[0] - 1e-12 or support.max() > pts[-1] + 1e-12):
        raise RangeError("step function support escapes the partition window")
    total = 0.0
    for i in range(pts.size - 1):
        sup = f.ess_sup(pts[i], pts[i + 1])
        if sup > 0.0:
            total += part.ratio ** (part.n_start + i) * sup**p
    return total ** (1.0 / p)


# -- interval thinning and disjoint-block verification -----------------------


@dataclass
class ThinningResult:
    kept_indices: list
    intervals: list
    certificates: list  # (index, sum_of_psi_b_over_partners, psi_a, surplus)
    mode: str

    @property
    def all_hold(self) -> bool:
        return all(s >= 0.0 for (_, _, _, s) in self.certificates)


def thin_intervals(intervals, psi_eval, mode: str | None = None) -> ThinningResult:
    """Greedy sparsification of a monotone interval family.

    ``decreasing`` families (b_1 > a_1 > b_2 > ... -> 0) are scanned from
    the small end keeping an interval when the psi-mass of everything
    already kept (which is its future tail) fits under psi(a); the emitted
    certificate per kept interval is exactly that tail inequality, computed
    over the finite list.  ``increasing`` families (a_1 < b_1 < a_2 < ...)
    are scanned forward with the symmetric prefix inequality.
    """
    iv = [(float(a), float(b)) for a, b in intervals]
    if not iv:
        raise ArgumentError("empty interval list")
    for a, b in iv:
        if not (0.0 < a < b):
            raise ArgumentError("intervals need 0 < a < b")
    if mode is None:
        mode = "decreasing" if len(iv) < 2 or iv[1][1] <= iv[0][0] else "increasing"
    if mode == "decreasing":
        for (a1, b1), (a2, b2) in zip(iv, iv[1:]):
            if not (b1 > a1 > b2 > a2):
                raise ArgumentError("family is not strictly decreasing")
        order = range(len(iv) - 1, -1, -1)
    elif mode == "increasing":
        for (a1, b1), (a2, b2) in zip(iv, iv[1:]):
            if not (a1 < b1 < a2 < b2):
                raise ArgumentError("family is not strictly increasing")
        order = range(len(iv))
    else:
        raise ArgumentError(f"unknown mode {mode!r}")

    kept = []
    running = 0.0
    certificates = []
    for idx in order:
        a, b = iv[idx]
        pa, pb = float(psi_eval(a)), float(psi_eval(b))
        if pa >= running:
            certificates.append((idx, running, pa, pa - running))
            kept.append(idx)
            running += pb
    kept.sort()
    certificates.sort()
    return ThinningResult(
        kept_indices=kept,
        intervals=[iv[i] for i in kept],
        certificates=certificates,
        mode=mode,
    )


def verify_block_c0(phi: ConcaveFn, intervals, trials: int, rng) -> dict:
    """Disjoint random blocks on the kept intervals: two-sided sup bound.

    For each trial, random nonnegative step functions supported on the
    intervals are summed; the norm used is the Marcinkiewicz norm of the
    prefix-average image.  All norms in a trial share one candidate set, so
    the lower bound max_k ||x_k|| <= ||sum x_k|| is preserved numerically.
    """
    iv = [(float(a), float(b)) for a, b in intervals]
    m = len(iv)
    min_ratio, max_ratio = math.inf, -math.inf
    left_violations = 0
    for _ in range(max(trials, 1)):
        pieces = []
        for a, b in iv:
            ncell = int(rng.integers(1, 4))
            cuts = np.sort(rng.uniform(a, b, size=ncell - 1))
            edges = np.concatenate([[0.0, a], cuts, [b]])
            vals = np.concatenate([[0.0], rng.uniform(0.25, 1.0, size=ncell)])
            pieces.append(StepFn(np.unique(edges), vals, HALFLINE))
        shared = np.unique(
            np.concatenate([candidate_levels(cesaro_fn(p), 9) for p in pieces])
        )
        norms = [
            marcinkiewicz_cesaro_norm(phi, p, extra_t=shared, samples_per_segment=5)
            for p in pieces
        ]
        edges = np.unique(np.concatenate([p.breakpoints for p in pieces]))
        total_vals = np.sum([resample(p, edges) for p in pieces], axis=0)
        total = StepFn(edges, total_vals, HALFLINE)
        norm_sum = marcinkiewicz_cesaro_norm(phi, total, extra_t=shared, samples_per_segment=5)
        biggest = max(norms)
        if norm_sum < biggest * (1.0 - 1e-12):
            left_violations += 1
        ratio = norm_sum / biggest
        min_ratio = min(min_ratio, ratio)
        max_ratio = max(max_ratio, ratio)
    return {
        "intervals": m,
        "trials": trials,
        "left_violations": left_violations,
        "min_ratio": min_ratio,
        "max_ratio": max_ratio,
    }
