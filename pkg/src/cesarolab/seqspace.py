"""Finite-section sequence transforms and norms.

A sequence is any finite real vector; entries beyond its length are zero.
Under that convention every norm here is the exact value of the
corresponding infinite-dimensional norm, except where a docstring says
otherwise:

* prefix-average (Cesaro) and tail (Copson) transforms,
* decreasing majorant and decreasing rearrangement,
* dilation operators (repeat / block-average),
* weighted l_p, Lorentz and Marcinkiewicz norms, and the composite
  sup-average space ``ces_inf(v)`` and down-weighted ``tandori_l1(w)``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace

import numpy as np

from . import concave as _concave
from .concave import ConcaveFn
from .errors import ArgumentError


def as_seq(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise ArgumentError("sequence must be a nonempty 1-d vector")
    if not np.all(np.isfinite(a)):
        raise ArgumentError("sequence entries must be finite")
    return a


def load_seq(path) -> np.ndarray:
    """Sequence file: one real per line, or a single JSON array."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read().strip()
    if text.startswith("["):
        return as_seq(json.loads(text))
    vals = [float(tok) for tok in text.split()]
    return as_seq(vals)


# -- transforms ----------------------------------------------------------


def cesaro_seq(a) -> np.ndarray:
    """Prefix averages of |a|: n-th entry is (1/n) * sum_{k<=n} |a_k|."""
    a = as_seq(a)
    return np.cumsum(np.abs(a)) / np.arange(1, a.size + 1)


def copson_seq(a) -> np.ndarray:
    """Tail sums of |a_k|/k from k=n on; the zero tail contributes nothing."""
    a = as_seq(a)
    ratios = np.abs(a) / np.arange(1, a.size + 1)
    return np.cumsum(ratios[::-1])[::-1]


def majorant_seq(a) -> np.ndarray:
    """Decreasing majorant: running maximum of |a| from the right."""
    a = as_seq(a)
    return np.maximum.accumulate(np.abs(a)[::-1])[::-1]


def rearrange_seq(a) -> np.ndarray:
    """Decreasing rearrangement of |a|."""
    a = as_seq(a)
    return np.sort(np.abs(a))[::-1]


def dilate_seq(a, m: int, direction: str) -> np.ndarray:
    """Dilation by an integer factor.

    ``expand`` repeats every entry m times; ``contract`` averages
    consecutive m-blocks, zero-padding the ragged final block.
    """
    a = as_seq(a)
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ArgumentError("dilation factor must be a positive integer")
    if direction == "expand":
        return np.repeat(a, m)
    if direction == "contract":
        nblocks = -(-a.size // m)
        padded = np.zeros(nblocks * m)
        padded[: a.size] = a
        return padded.reshape(nblocks, m).mean(axis=1)
    raise ArgumentError("direction must be 'expand' or 'contract'")


# -- space specifications ------------------------------------------------

_BASES = ("lp", "lorentz", "marcinkiewicz")
_TRANSFORMS = ("none", "cesaro", "tandori")


@dataclass(frozen=True)
class SeqSpaceSpec:
    """Sequence-space description: a base norm plus an optional transform.

    The composite spaces are expressed through the transform field:
    ``ces_inf(v)`` is sup-weighted l_inf(v) of the prefix averages
    (base lp(inf, v), transform 'cesaro'); ``tandori_l1(w)`` is l_1(w) of
    the decreasing majorant (base lp(1, w), transform 'tandori').
    """

    base: str
    transform: str = "none"
    p: float = math.nan
    phi: ConcaveFn = None
    weight: object = None  # None | ('pow', alpha) | tuple of floats
    label: str = ""

    def __post_init__(self):
        if self.base not in _BASES:
            raise ArgumentError(f"unknown base {self.base!r}")
        if self.transform not in _TRANSFORMS:
            raise ArgumentError(f"unknown transform {self.transform!r}")
        if self.base == "lp":
            if not (self.p >= 1.0):
                raise ArgumentError("p must satisfy p >= 1")
        else:
            phi = self.phi
            if phi is None or phi.domain != _concave.HALF_LINE:
                raise ArgumentError("lorentz/marcinkiewicz need a concave phi on the half line")
            if self.base == "lorentz" and phi.value_at_zero != 0.0:
                raise ArgumentError("lorentz generator must vanish at 0")

    @property
    def symmetric(self) -> bool:
        return self.transform == "none" and (self.base != "lp" or self.weight is None)

    def describe(self) -> str:
        return self.label or f"{self.base}(transform={self.transform})"


def lp(p: float, weight=None) -> SeqSpaceSpec:
    return SeqSpaceSpec("lp", "none", p=float(p), weight=_canon_weight(weight), label=f"lp:{p}")


def lorentz(phi: ConcaveFn) -> SeqSpaceSpec:
    return SeqSpaceSpec("lorentz", "none", phi=phi, label="lorentz")


def marcinkiewicz(phi: ConcaveFn) -> SeqSpaceSpec:
    return SeqSpaceSpec("marcinkiewicz", "none", phi=phi, label="marcinkiewicz")


def ces_inf(v=None) -> SeqSpaceSpec:
    return SeqSpaceSpec("lp", "cesaro", p=math.inf, weight=_canon_weight(v), label="ces_inf")


def tandori_l1(w=None) -> SeqSpaceSpec:
    return SeqSpaceSpec("lp", "tandori", p=1.0, weight=_canon_weight(w), label="tandori_l1")


def with_cesaro(spec: SeqSpaceSpec) -> SeqSpaceSpec:
    if spec.transform != "none":
        raise ArgumentError("spec already carries a transform")
    return replace(spec, transform="cesaro", label=f"cesaro[{spec.describe()}]")


def with_tandori(spec: SeqSpaceSpec) -> SeqSpaceSpec:
    if spec.transform != "none":
        raise ArgumentError("spec already carries a transform")
    return replace(spec, transform="tandori", label=f"tandori[{spec.describe()}]")


def _canon_weight(weight):
    if weight is None:
        return None
    if isinstance(weight, tuple) and len(weight) == 2 and weight[0] == "pow":
        return ("pow", float(weight[1]))
    arr = as_seq(weight)
    if np.any(arr <= 0.0):
        raise ArgumentError("explicit weights must be strictly positive")
    return tuple(float(x) for x in arr)


def weight_values(weight, n: int) -> np.ndarray:
    """Materialise the first n weight values (1-based index)."""
    if weight is None:
        return np.ones(n)
    if isinstance(weight, tuple) and len(weight) == 2 and weight[0] == "pow":
        return np.arange(1, n + 1, dtype=float) ** weight[1]
    arr = np.asarray(weight, dtype=float)
    if arr.size < n:
        raise ArgumentError(f"weight vector too short: need {n}, have {arr.size}")
    return arr[:n]


# -- norms ---------------------------------------------------------------


def base_norm_seq(spec: SeqSpaceSpec, a) -> float:
    """Norm of the untransformed base space; exact at the finite section.

    For the Marcinkiewicz base the supremum over all n is attained at
    n <= len(a): prefix sums are constant beyond the section and phi(n)/n is
    nonincreasing for concave phi with phi(0) >= 0, so tail candidates are
    dominated by the n = len(a) one.
    """
    if spec.transform != "none":
        raise ArgumentError("base_norm_seq expects an untransformed spec")
    a = as_seq(a)
    if spec.base == "lp":
        w = weight_values(spec.weight, a.size)
        vals = np.abs(a) * w
        if math.isinf(spec.p):
            return float(np.max(vals))
        if spec.p == 1.0:
            return float(np.sum(vals))
        return float(np.sum(vals**spec.p) ** (1.0 / spec.p))
    star = rearrange_seq(a)
    n = np.arange(1, a.size + 1, dtype=float)
    if spec.base == "lorentz":
        dphi = spec.phi(n + 1.0) - spec.phi(n)
        return float(np.dot(star, dphi))
    prefix = np.cumsum(star)
    return float(np.max(spec.phi(n) / n * prefix))


def marcinkiewicz_details(phi: ConcaveFn, a):
    """Marcinkiewicz value, its argmax, and the analytic tail limit.

    The tail limit ``lim_n phi(n)/n * sum|a|`` is provided alongside (it is
    always dominated by the finite-section supremum, see base_norm_seq).
    """
    a = as_seq(a)
    star = rearrange_seq(a)
    n = np.arange(1, a.size + 1, dtype=float)
    vals = phi(n) / n * np.cumsum(star)
    k = int(np.argmax(vals))
    if phi.kind == "power":
        slope_inf = 1.0 if phi.alpha == 1.0 else 0.0
    elif phi.kind == "affine":
        slope_inf = phi.b
    else:
        slope_inf = float(phi._slopes[-1])
    return float(vals[k]), k + 1, float(slope_inf * star.sum())


def cesaro_norm_seq(spec: SeqSpaceSpec, a) -> float:
    """Base norm of the prefix averages of |a|.

    For base l_inf(v) this is the sup-average norm; with v identically one,
    or v(n) = n/W(n) for a nondecreasing W, the supremum over all n is
    attained at n <= len(a) because prefix averages only decay beyond the
    section, so the finite-section value is exact.
    """
    return base_norm_seq(spec, cesaro_seq(a))


def tandori_norm_seq(spec: SeqSpaceSpec, a) -> float:
    """Base norm of the decreasing majorant of a (exact: the majorant of a
    finite section vanishes beyond it)."""
    return base_norm_seq(spec, majorant_seq(a))


def seq_norm(spec: SeqSpaceSpec, a) -> float:
    """Norm of ``a`` in the space described by ``spec`` (transform included)."""
    if spec.transform == "none":
        return base_norm_seq(spec, a)
    inner = replace(spec, transform="none")
    if spec.transform == "cesaro":
        return cesaro_norm_seq(inner, a)
    return tandori_norm_seq(inner, a)


def fundamental_seq(spec: SeqSpaceSpec, n: int) -> float:
    """Norm of the all-ones vector of length n."""
    if n < 1:
        raise ArgumentError("n must be >= 1")
    return seq_norm(spec, np.ones(int(n)))


# -- closed forms used by the duality oracles -----------------------------


def ces_inf_norm_from_w(w, a) -> float:
    """Sup-average norm with v(n) = n/W(n): max_n prefix|a| / W(n).

    Exact for a supported in [1, N]: beyond the section the prefix sum is
    constant while W keeps growing.
    """
    a = as_seq(a)
    w = as_seq(w)
    if w.size < a.size:
        raise ArgumentError("weight shorter than the vector")
    if np.any(w < 0.0) or w[0] <= 0.0:
        raise ArgumentError("need w >= 0 with w_1 > 0")
    W = np.cumsum(w[: a.size])
    return float(np.max(np.cumsum(np.abs(a)) / W))


def tandori_l1_norm(w, a) -> float:
    """Down-weighted l1 norm: sum of the decreasing majorant against w."""
    a = as_seq(a)
    w = weight_values(w, a.size) if not isinstance(w, np.ndarray) else w[: a.size]
    return float(np.dot(majorant_seq(a), w[: a.size]))


# -- spec grammar ---------------------------------------------------------

_POW_RE = re.compile(r"^pow\(([-+0-9.eE]+)\)$")


def parse_seq_spec(text: str) -> SeqSpaceSpec:
    """Parse the CLI grammar.

    ``lp:<p>[:weight=pow(<alpha>)]``, ``lorentz:power:<alpha>``,
    ``marcinkiewicz:power:<alpha>``, ``ces_inf[:v=<file>]``,
    ``tandori_l1[:w=<file>]``.
    """
    parts = text.strip().split(":")
    head = parts[0]
    try:
        if head == "lp":
            if len(parts) < 2:
                raise ArgumentError("lp needs an exponent, e.g. lp:2")
            p = math.inf if parts[1] in ("inf", "Inf", "oo") else float(parts[1])
            weight = None
            if len(parts) == 3:
                m = _POW_RE.match(parts[2].removeprefix("weight="))
                if not m:
                    raise ArgumentError(f"bad weight token {parts[2]!r}")
                weight = ("pow", float(m.group(1)))
            elif len(parts) > 3:
                raise ArgumentError("too many ':' fields for lp")
            return lp(p, weight)
        if head in ("lorentz", "marcinkiewicz"):
            if len(parts) != 3 or parts[1] != "power":
                raise ArgumentError(f"{head} spec must be {head}:power:<alpha>")
            phi = _concave.power(float(parts[2]))
            return lorentz(phi) if head == "lorentz" else marcinkiewicz(phi)
        if head == "ces_inf":
            if len(parts) == 1:
                return ces_inf()
            if len(parts) == 2 and parts[1].startswith("v="):
                return ces_inf(load_seq(parts[1][2:]))
            raise ArgumentError("ces_inf takes at most one v=<file> field")
        if head == "tandori_l1":
            if len(parts) == 1:
                return tandori_l1()
            if len(parts) == 2 and parts[1].startswith("w="):
                return tandori_l1(load_seq(parts[1][2:]))
            raise ArgumentError("tandori_l1 takes at most one w=<file> field")
    except ValueError as exc:
        raise ArgumentError(f"cannot parse space spec {text!r}: {exc}") from exc
    raise ArgumentError(f"unknown space spec {text!r}")
