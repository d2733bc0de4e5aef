"""Solve f(z) = w for real targets w along extracted real-slice branches.

Real outputs of a real-coefficient f live exactly on the real slice, so
the 2D complex root hunt reduces to 1D bracketing along each branch:
scan the stored branch values for sign changes of v - w, close each
bracket with Brent's method on the branch parametrisation (interpolated
points are pulled back onto the locus before evaluating), and polish
with complex Newton as an independent verification.  Tangential contacts
(v - w touches zero without crossing, the level plane grazing a branch
extremum) are picked up by a local-minimum scan and flagged.

Non-real roots of real-coefficient functions come in conjugate pairs;
the result set links each such root to its partner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .slicer import (
    KIND_HORIZONTAL,
    KIND_REAL_AXIS,
    KIND_VERTICAL,
    Branch,
    SliceSet,
    refine_point,
)

RESIDUAL_LIMIT = 1e-9  # a returned root must re-evaluate at least this well
DEDUPE_RADIUS = 1e-8
CONJUGATE_TOL = 1e-8
TANGENCY_ACCEPT = 1e-7  # refined |v - w| minimum that counts as a contact
_TANGENCY_COARSE = 1e-3  # discrete minima worth refining, scaled by max(1, |w|)
_BRENT_TOL = 1e-13
_NEWTON_STEPS = 50
_NEWTON_TOL = 1e-12
_ANCHOR_TOL = 1e-6


class NewtonError(ex.ExprError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class Root:
    z: complex
    residual: float
    branch_index: int | None
    tangency: bool = False
    newton_verified: bool = True
    conjugate_partner: int | None = None


# ---------------------------------------------------------------------------
# 1D machinery


def brent_root(f, a: float, b: float, fa: float, fb: float, xtol: float = _BRENT_TOL,
               max_iter: int = 200) -> float:
    """Classic Brent root bracketing on [a, b]; fa, fb must differ in sign
    (zero counts as negative)."""
    c, fc = a, fa
    d = e = b - a
    eps = 2.220446049250313e-16
    for _ in range(max_iter):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 2.0 * eps * abs(b) + xtol
        m = 0.5 * (c - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) < tol or abs(fa) <= abs(fb):
            e = d = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            s, e = e, d
            if 2.0 * p < 3.0 * m * q - abs(tol * q) and p < abs(0.5 * s * q):
                d = p / q
            else:
                e = d = m
        a, fa = b, fb
        if abs(d) > tol:
            b += d
        else:
            b += tol if m > 0 else -tol
        fb = f(b)
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            d = e = b - a
    return b


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Golden-section minimiser of f on [a, b]."""
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# branch parametrisation


class _BranchPath:
    """Branch points parametrised by free coordinate (or chord length for
    implicit curves), with pull-back onto the locus before evaluation."""

    def __init__(self, e: ex.Expr, de: ex.Expr, branch: Branch, im_tol: float):
        self.e, self.de, self.branch = e, de, branch
        self.im_tol = im_tol
        pts = branch.points
        if branch.kind == KIND_VERTICAL:
            t = pts[:, 1]
        elif branch.kind in (KIND_REAL_AXIS, KIND_HORIZONTAL):
            t = pts[:, 0]
        else:
            steps = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
            t = np.concatenate([[0.0], np.cumsum(steps)])
        keep = np.concatenate([[True], np.diff(t) > 0])
        self.t = t[keep]
        self.x = pts[keep, 0]
        self.y = pts[keep, 1]
        self.v = pts[keep, 2]

    def point_at(self, t: float) -> tuple[float, float]:
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        k = min(max(k, 0), len(self.t) - 2)
        span = self.t[k + 1] - self.t[k]
        a = 0.0 if span == 0 else (t - self.t[k]) / span
        x = self.x[k] + a * (self.x[k + 1] - self.x[k])
        y = self.y[k] + a * (self.y[k + 1] - self.y[k])
        return self._pull_back(x, y)

    def _pull_back(self, x: float, y: float) -> tuple[float, float]:
        kind = self.branch.kind
        if kind == KIND_VERTICAL:
            axis = "x"
        elif kind in (KIND_REAL_AXIS, KIND_HORIZONTAL):
            axis = "y"
        else:
            try:
                d = ex.evaluate(self.de, complex(x, y))
                axis = "x" if abs(d.imag) >= abs(d.real) else "y"
            except ex.EvalError:
                return x, y
        try:
            r = refine_point(
                self.e, x, y, axis, im_tol=self.im_tol, max_iters=20, derivative=self.de
            )
            return r.x, r.y
        except ex.EvalError:
            return x, y

    def value_at(self, t: float, w: float) -> float:
        x, y = self.point_at(t)
        try:
            return ex.evaluate(self.e, complex(x, y)).real - w
        except ex.EvalError:
            return math.nan


# ---------------------------------------------------------------------------
# Newton verification


def _newton_iterate(e: ex.Expr, de: ex.Expr, z0: complex, w: float) -> complex:
    z = complex(z0)
    for _ in range(_NEWTON_STEPS):
        try:
            f = ex.evaluate(e, z) - w
        except ex.EvalError as exc:
            raise NewtonError(f"evaluation failed: {exc}") from exc
        if abs(f) < _NEWTON_TOL:
            return z
        try:
            d = ex.evaluate(de, z)
        except ex.EvalError as exc:
            raise NewtonError(f"derivative evaluation failed: {exc}") from exc
        if abs(d) < 1e-300:
            raise NewtonError("derivative vanished")
        z = z - f / d
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise NewtonError("diverged")
    try:
        if abs(ex.evaluate(e, z) - w) < _NEWTON_TOL:
            return z
    except ex.EvalError:
        pass
    raise NewtonError("did not converge")


def newton_verify(
    e: ex.Expr,
    z0: complex,
    w: float,
    *,
    derivative: ex.Expr | None = None,
    anchor: complex | None = None,
) -> Root:
    """Polish z0 with complex Newton on f(z) - w.

    Success requires the residual to drop under 1e-12; when ``anchor``
    is given (the slice point the candidate came from) the limit must
    also stay within 1e-6 of it, so verification cannot wander off to a
    different root.  Raises NewtonError otherwise.
    """
    de = derivative if derivative is not None else ex.differentiate(e)
    z = _newton_iterate(e, de, z0, w)
    if anchor is not None and abs(z - anchor) > _ANCHOR_TOL:
        raise NewtonError("left the branch")
    residual = abs(ex.evaluate(e, z) - w)
    return Root(z=z, residual=residual, branch_index=None)


def _polish_critical(e: ex.Expr, de: ex.Expr, z0: complex, w: float) -> complex:
    """Sharpen a tangency root by Newton on f' = 0 (the contact point is a
    critical point of f); fall back to z0 unless the polish stays local
    and keeps the residual at verification level."""
    dde = ex.differentiate(de)
    z = complex(z0)
    try:
        for _ in range(20):
            d = ex.evaluate(de, z)
            if abs(d) < 1e-300:
                break
            dd = ex.evaluate(dde, z)
            if abs(dd) < 1e-300:
                return z0
            step = d / dd
            z = z - step
            if abs(step) < 1e-15:
                break
        if abs(z - z0) <= 1e-4 and abs(ex.evaluate(e, z) - w) < _NEWTON_TOL:
            return z
    except ex.EvalError:
        pass
    return z0


# ---------------------------------------------------------------------------
# main solve


def solve_level(e: ex.Expr, w: float, s: SliceSet) -> list[Root]:
    """All solutions of f(z) = w on the branches of s, deduplicated,
    Newton-verified, sorted by (Re z, Im z), and conjugate-paired."""
    if not math.isfinite(w):
        raise ValueError("target must be finite")
    de = ex.differentiate(e)
    candidates: list[Root] = []
    for bi, branch in enumerate(s.branches):
        if len(branch.points) < 2:
            continue
        path = _BranchPath(e, de, branch, s.grid.im_tol)
        candidates.extend(_scan_branch(e, de, path, bi, w))
    roots = _dedupe(candidates)
    roots = [r for r in roots if _in_window(r.z, s)]
    roots.sort(key=lambda r: (r.z.real, r.z.imag))
    _pair_conjugates(roots)
    return roots


def _scan_branch(e, de, path: _BranchPath, bi: int, w: float) -> list[Root]:
    t, v = path.t, path.v
    d = v - w
    out: list[Root] = []
    sign = d > 0.0
    change = sign[:-1] != sign[1:]
    near_change = np.zeros(len(t), dtype=bool)
    idx = np.nonzero(change)[0]
    for k in idx.tolist():
        near_change[k] = near_change[k + 1] = True
        g = lambda tt: path.value_at(tt, w)
        t_star = brent_root(g, float(t[k]), float(t[k + 1]), float(d[k]), float(d[k + 1]))
        root = _finish(e, de, path, bi, w, t_star, tangency=False)
        if root is not None:
            out.append(root)
    # endpoint contacts (roots sitting exactly on the window boundary)
    for k in (0, len(t) - 1):
        if not near_change[k] and abs(d[k]) < TANGENCY_ACCEPT:
            root = _finish(e, de, path, bi, w, float(t[k]), tangency=False)
            if root is not None:
                out.append(root)
    # tangential contacts: local minima of |v - w| that never cross
    coarse = _TANGENCY_COARSE * max(1.0, abs(w))
    ad = np.abs(d)
    for k in range(1, len(t) - 1):
        if near_change[k - 1] or near_change[k] or near_change[k + 1]:
            continue
        if ad[k] <= ad[k - 1] and ad[k] <= ad[k + 1] and ad[k] < coarse:
            g_abs = lambda tt: abs(path.value_at(tt, w))
            t_star = golden_min(g_abs, float(t[k - 1]), float(t[k + 1]))
            if g_abs(t_star) < TANGENCY_ACCEPT:
                root = _finish(e, de, path, bi, w, t_star, tangency=True)
                if root is not None:
                    out.append(root)
    return out


def _finish(e, de, path: _BranchPath, bi: int, w: float, t_star: float,
            tangency: bool) -> Root | None:
    x, y = path.point_at(t_star)
    z0 = complex(x, y)
    try:
        verified = newton_verify(e, z0, w, derivative=de, anchor=z0)
        z = verified.z
        ok = True
    except NewtonError:
        z = z0
        ok = False
    if tangency:
        z = _polish_critical(e, de, z, w)
    try:
        residual = abs(ex.evaluate(e, z) - w)
    except ex.EvalError:
        return None
    if residual >= RESIDUAL_LIMIT:
        return None
    return Root(z=z, residual=residual, branch_index=bi, tangency=tangency,
                newton_verified=ok)


def _dedupe(candidates: list[Root]) -> list[Root]:
    # representative: best residual, then lowest branch, then lexicographic z
    ordered = sorted(
        candidates,
        key=lambda r: (r.residual, r.branch_index or 0, r.z.real, r.z.imag),
    )
    kept: list[Root] = []
    for cand in ordered:
        merged = False
        for existing in kept:
            if abs(cand.z - existing.z) < DEDUPE_RADIUS:
                existing.tangency = existing.tangency or cand.tangency
                merged = True
                break
        if not merged:
            kept.append(cand)
    return kept


def _in_window(z: complex, s: SliceSet) -> bool:
    w = s.window
    ex_ = 1e-9 * max(1.0, abs(w.x_min), abs(w.x_max))
    ey_ = 1e-9 * max(1.0, abs(w.y_min), abs(w.y_max))
    return (
        w.x_min - ex_ <= z.real <= w.x_max + ex_
        and w.y_min - ey_ <= z.imag <= w.y_max + ey_
    )


def _pair_conjugates(roots: list[Root]) -> None:
    for i, r in enumerate(roots):
        if abs(r.z.imag) <= CONJUGATE_TOL or r.conjugate_partner is not None:
            continue
        target = r.z.conjugate()
        for j, other in enumerate(roots):
            if j != i and abs(other.z - target) < CONJUGATE_TOL:
                r.conjugate_partner = j
                other.conjugate_partner = i
                break
