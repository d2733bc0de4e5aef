"""Shared test helpers: seeded random expression trees, cached slices,
and symmetric point-set matching."""

from __future__ import annotations

import math
import random
from functools import lru_cache

import numpy as np

from realslice import expr as ex
from realslice import slicer as sl

# functions that evaluate everywhere at desk scale (no poles to dodge)
SAFE_FUNCS = ("sin", "cos", "sinh", "cosh", "tanh", "sech", "exp")


def random_expr(rng: random.Random, depth: int = 3) -> ex.Expr:
    """Random tame expression tree over z with real coefficients."""
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.5:
            return ex.Z
        if r < 0.9:
            return ex.Const(round(rng.uniform(0.1, 2.0), 3))
        return ex.NamedConst(rng.choice(("pi", "e")))
    r = rng.random()
    if r < 0.45:
        op = rng.choice("+-*")
        return ex.BinOp(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1))
    if r < 0.6:
        return ex.Pow(random_expr(rng, depth - 1), ex.Const(float(rng.randint(2, 3))))
    if r < 0.7:
        return ex.Neg(random_expr(rng, depth - 1))
    return ex.Fn(rng.choice(SAFE_FUNCS), random_expr(rng, depth - 1))


def random_expr_with_var(rng: random.Random, depth: int = 3) -> ex.Expr:
    e = random_expr(rng, depth)
    if ex.is_constant(e):
        e = ex.BinOp("+", e, ex.Fn("sin", ex.Z))
    return e


@lru_cache(maxsize=32)
def cached_slice(text: str, window: tuple, nx: int = 256, refine: int = 3) -> sl.SliceSet:
    e = ex.parse(text)
    w = sl.Window(*window)
    return sl.extract_slice(e, w, sl.GridSpec(nx=nx, ny=nx, refine_iters=refine))


STD_WINDOW = (-2 * math.pi, 2 * math.pi, -3.0, 3.0)


def all_points(s: sl.SliceSet) -> np.ndarray:
    if not s.branches:
        return np.empty((0, 3))
    return np.vstack([b.points for b in s.branches])


def mirror_mismatch(points: np.ndarray, dx: float, dy: float) -> float:
    """Worst distance (cell-normalised xy plus value mismatch) from each
    point's mirror (x, -y, v) to the nearest actual point."""
    if len(points) == 0:
        return 0.0
    pts = points.copy()
    mirrored = pts.copy()
    mirrored[:, 1] = -mirrored[:, 1]
    scale = np.array([dx, dy, 1.0])
    a = pts / scale
    b = mirrored / scale
    worst = 0.0
    for k in range(0, len(b), 512):
        blk = b[k : k + 512]
        d = np.abs(blk[:, None, :2] - a[None, :, :2]).max(axis=2)
        dv = np.abs(blk[:, None, 2] - a[None, :, 2]) / (1.0 + np.abs(blk[:, None, 2]))
        tot = np.maximum(d, dv)
        worst = max(worst, float(tot.min(axis=1).max()))
    return worst
