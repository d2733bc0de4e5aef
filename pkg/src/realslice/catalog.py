"""Closed-form real-slice branch families for sin, sec, cosh, and exp.

These four functions have fully worked-out slices: the locus Im f = 0 is
a union of the real axis and of vertical/horizontal lines, and on each
line Re f reduces to an elementary function of the free coordinate.
The catalog is both a user-facing result (exact branches) and the oracle
the numeric slicer is tested against.

Branch families:

  sin   real axis (value sin t) and verticals x0 = (2n+1)*pi/2 with value
        +cosh t for even n, -cosh t for odd n.
  sec   real axis split at the poles t = (2k+1)*pi/2 (value sec t on each
        pole-free interval) and verticals x0 = n*pi with value +-sech t.
  cosh  vertical x0 = 0 with value cos t, horizontals y0 = n*pi with
        value (-1)^n cosh t; the n = 0 horizontal is the real axis.
  exp   horizontals y0 = n*pi with value (-1)^n e^t only; n = 0 is the
        real axis.  Branch values repeat with period 2*pi in y0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .slicer import KIND_HORIZONTAL, KIND_REAL_AXIS, KIND_VERTICAL, Window

FUNCTION_IDS = ("sin", "sec", "cosh", "exp")


class CatalogError(ValueError):
    pass


class PoleError(CatalogError):
    pass


@dataclass(frozen=True)
class BranchSpec:
    """One closed-form branch: a line segment plus a value rule."""

    fn: str
    kind: str
    anchor: float | None  # x0 for verticals, y0 for horizontals, None for real axis
    n: int | None  # family index; None for the sin/sec real axis
    lo: float  # free-coordinate range (t runs along the line)
    hi: float

    def rule_text(self) -> str:
        """Human-readable value rule, e.g. '-sech(t)'."""
        sign = "-" if (self.n is not None and self.n % 2) else "+"
        if self.fn == "sin":
            return "+sin(t)" if self.kind == KIND_REAL_AXIS else f"{sign}cosh(t)"
        if self.fn == "sec":
            return "+sec(t)" if self.kind == KIND_REAL_AXIS else f"{sign}sech(t)"
        if self.fn == "cosh":
            return "+cos(t)" if self.kind == KIND_VERTICAL else f"{sign}cosh(t)"
        return f"{sign}exp(t)"


def branch_value(b: BranchSpec, t: float) -> float:
    """Exact value of Re f at free coordinate t on the branch.

    Raises PoleError on the sec real axis at t = (2k+1)*pi/2.
    """
    neg = b.n is not None and b.n % 2 == 1
    if b.fn == "sin":
        v = math.sin(t) if b.kind == KIND_REAL_AXIS else math.cosh(t)
    elif b.fn == "sec":
        if b.kind == KIND_REAL_AXIS:
            k = round(t / math.pi - 0.5)
            if abs(t - (2 * k + 1) * math.pi / 2) < 1e-12:
                raise PoleError(f"sec pole at t = {t!r}")
            return 1.0 / math.cos(t)
        v = 1.0 / math.cosh(t)
    elif b.fn == "cosh":
        v = math.cos(t) if b.kind == KIND_VERTICAL else math.cosh(t)
    elif b.fn == "exp":
        v = math.exp(t)
    else:
        raise CatalogError(f"unknown function id {b.fn!r}")
    return -v if neg else v


def _indices_in(lo: float, hi: float, offset: float, step: float) -> list[int]:
    """All integers n with offset + n*step in [lo, hi]."""
    n_lo = math.ceil((lo - offset) / step - 1e-12)
    n_hi = math.floor((hi - offset) / step + 1e-12)
    return list(range(n_lo, n_hi + 1))


def enumerate_branches(fn: str, w: Window) -> list[BranchSpec]:
    """Branches of fn whose line meets the window; ordered real axis
    first, then line families by index n."""
    if fn not in FUNCTION_IDS:
        raise CatalogError(f"unknown function id {fn!r}")
    out: list[BranchSpec] = []
    has_axis = w.y_min <= 0.0 <= w.y_max
    if fn == "sin":
        if has_axis:
            out.append(BranchSpec(fn, KIND_REAL_AXIS, None, None, w.x_min, w.x_max))
        for n in _indices_in(w.x_min, w.x_max, math.pi / 2, math.pi):
            out.append(
                BranchSpec(fn, KIND_VERTICAL, (2 * n + 1) * math.pi / 2, n, w.y_min, w.y_max)
            )
    elif fn == "sec":
        if has_axis:
            poles = [
                (2 * k + 1) * math.pi / 2
                for k in _indices_in(w.x_min, w.x_max, math.pi / 2, math.pi)
            ]
            cuts = [w.x_min] + poles + [w.x_max]
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                if hi - lo > 1e-12:
                    out.append(BranchSpec(fn, KIND_REAL_AXIS, None, None, lo, hi))
        for n in _indices_in(w.x_min, w.x_max, 0.0, math.pi):
            out.append(BranchSpec(fn, KIND_VERTICAL, n * math.pi, n, w.y_min, w.y_max))
    elif fn == "cosh":
        for n in _indices_in(w.y_min, w.y_max, 0.0, math.pi):
            kind = KIND_REAL_AXIS if n == 0 else KIND_HORIZONTAL
            out.append(BranchSpec(fn, kind, n * math.pi, n, w.x_min, w.x_max))
        if w.x_min <= 0.0 <= w.x_max:
            out.append(BranchSpec(fn, KIND_VERTICAL, 0.0, 0, w.y_min, w.y_max))
        out.sort(key=_order_key)
    else:  # exp
        for n in _indices_in(w.y_min, w.y_max, 0.0, math.pi):
            kind = KIND_REAL_AXIS if n == 0 else KIND_HORIZONTAL
            out.append(BranchSpec(fn, kind, n * math.pi, n, w.x_min, w.x_max))
        out.sort(key=_order_key)
    return out


_KIND_ORDER = {KIND_REAL_AXIS: 0, KIND_VERTICAL: 1, KIND_HORIZONTAL: 2}


def _order_key(b: BranchSpec) -> tuple:
    return (_KIND_ORDER[b.kind], b.n if b.n is not None else 0, b.lo)


def sample_points(b: BranchSpec, count: int, margin: float = 0.0) -> np.ndarray:
    """(count, 3) array of (x, y, v) points along the branch.

    margin shrinks the free range at both ends (used to stay clear of
    poles on sec real-axis intervals).
    """
    lo, hi = b.lo + margin, b.hi - margin
    ts = np.linspace(lo, hi, count)
    vs = np.array([branch_value(b, float(t)) for t in ts])
    if b.kind == KIND_VERTICAL:
        xs = np.full(count, b.anchor)
        ys = ts
    else:
        xs = ts
        ys = np.full(count, 0.0 if b.anchor is None else b.anchor)
    return np.column_stack([xs, ys, vs])


def _even_range(lo: float, hi: float, decreasing: bool) -> tuple[float, float]:
    """Range of cosh (or sech, when decreasing) over [lo, hi]."""
    amax = max(abs(lo), abs(hi))
    amin = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
    if decreasing:
        return (1.0 / math.cosh(amax), 1.0 / math.cosh(amin))
    return (math.cosh(amin), math.cosh(amax))


def value_range(b: BranchSpec) -> tuple[float, float]:
    """Closed interval [lo, hi] of values the branch attains on its range.

    sec real-axis intervals adjacent to a pole are unbounded on that
    side; +-inf endpoints mark this.
    """
    neg = b.n is not None and b.n % 2 == 1
    if b.fn == "sin" and b.kind == KIND_REAL_AXIS:
        cands = [math.sin(b.lo), math.sin(b.hi)]
        for k in _indices_in(b.lo, b.hi, math.pi / 2, math.pi):
            cands.append(math.sin((2 * k + 1) * math.pi / 2))
        return (min(cands), max(cands))
    if b.fn == "sec" and b.kind == KIND_REAL_AXIS:
        def near_pole(t: float) -> bool:
            k = round(t / math.pi - 0.5)
            return abs(t - (2 * k + 1) * math.pi / 2) < 1e-9

        cands = []
        side_inf = 0
        for t in (b.lo, b.hi):
            if near_pole(t):
                side_inf += 1
            else:
                cands.append(1.0 / math.cos(t))
        for k in _indices_in(b.lo, b.hi, 0.0, math.pi):
            t = k * math.pi
            if b.lo < t < b.hi:
                cands.append(1.0 / math.cos(t))
        if not cands:
            return (-math.inf, math.inf)
        lo_v, hi_v = min(cands), max(cands)
        if side_inf:
            # sec is single-signed on a pole-free interval
            if hi_v > 0:
                hi_v = math.inf
            else:
                lo_v = -math.inf
        return (lo_v, hi_v)
    if b.fn == "sin" or (b.fn == "cosh" and b.kind != KIND_VERTICAL):
        lo_v, hi_v = _even_range(b.lo, b.hi, decreasing=False)
    elif b.fn == "sec":
        lo_v, hi_v = _even_range(b.lo, b.hi, decreasing=True)
    elif b.fn == "cosh":  # vertical: cos t
        cands = [math.cos(b.lo), math.cos(b.hi)]
        for k in _indices_in(b.lo, b.hi, 0.0, math.pi):
            cands.append(math.cos(k * math.pi))
        lo_v, hi_v = min(cands), max(cands)
    else:  # exp
        lo_v, hi_v = math.exp(b.lo), math.exp(b.hi)
    if neg:
        lo_v, hi_v = -hi_v, -lo_v
    return (lo_v, hi_v)
