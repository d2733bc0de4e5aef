"""Self-contained oracle-agreement suite behind the `verify` command.

Extracts the four cataloged functions numerically and checks the output
against the closed forms: branch counts and anchors, two-sided Hausdorff
distance between catalog lines and extracted polylines, soundness of
every emitted point under re-evaluation, and byte-determinism of the
serialized result across repeat runs and thread counts.
"""

from __future__ import annotations

import math

import numpy as np

from . import catalog as cat
from . import expr as ex
from . import slicer as sl
from .export import write_document

HAUSDORFF_TOL = 1e-2
_POLE_MARGIN_CELLS = 4.0

_CASES = [
    ("sin", sl.Window(-2 * math.pi, 2 * math.pi, -3.0, 3.0)),
    ("sec", sl.Window(-2 * math.pi, 2 * math.pi, -3.0, 3.0)),
    ("cosh", sl.Window(-2.0, 2.0, -7.0, 7.0)),
    ("exp", sl.Window(-2.0, 2.0, -7.0, 7.0)),
]


def catalog_sample_sets(fn: str, w: sl.Window, g: sl.GridSpec, count: int = 1000):
    """Dense catalog point samples, staying clear of masked pole cells."""
    dx = (w.x_max - w.x_min) / g.nx
    margin = _POLE_MARGIN_CELLS * dx
    out = []
    for spec in cat.enumerate_branches(fn, w):
        m = margin if (fn == "sec" and spec.kind == cat.KIND_REAL_AXIS) else 0.0
        if spec.hi - spec.lo <= 2 * m:
            continue
        out.append(cat.sample_points(spec, count, margin=m))
    return out


def catalog_polylines(fn: str, w: sl.Window) -> list[sl.Branch]:
    """Catalog branches as exact 2-point polylines in the (x, y) plane."""
    out = []
    for spec in cat.enumerate_branches(fn, w):
        if spec.kind == cat.KIND_VERTICAL:
            pts = np.array([[spec.anchor, spec.lo, 0.0], [spec.anchor, spec.hi, 0.0]])
        else:
            y0 = 0.0 if spec.anchor is None else spec.anchor
            pts = np.array([[spec.lo, y0, 0.0], [spec.hi, y0, 0.0]])
        out.append(sl.Branch(spec.kind, spec.anchor, pts))
    return out


def check_function(fn: str, w: sl.Window, g: sl.GridSpec) -> list[tuple[str, bool, str]]:
    results = []
    e = ex.parse(f"{fn}(z)")
    s = sl.extract_slice(e, w, g)

    specs = cat.enumerate_branches(fn, w)
    line_specs = [b for b in specs if b.kind != cat.KIND_REAL_AXIS]
    ok_anchor = True
    detail = ""
    for spec in line_specs:
        hits = [
            b
            for b in s.branches
            if b.kind == spec.kind
            and b.anchor is not None
            and abs(b.anchor - spec.anchor) < 1e-3
        ]
        if len(hits) != 1:
            ok_anchor = False
            detail = f"{spec.kind} at {spec.anchor:.6f}: {len(hits)} matches"
            break
    results.append((f"{fn}: line branches match catalog anchors", ok_anchor, detail))

    sample_sets = catalog_sample_sets(fn, w, g)
    d_fwd = max(
        sl.directed_hausdorff(pts[:, :2], s.branches) for pts in sample_sets
    )
    cat_lines = catalog_polylines(fn, w)
    all_pts = np.vstack([b.xy() for b in s.branches])
    d_back = sl.directed_hausdorff(all_pts, cat_lines)
    ok_h = d_fwd < HAUSDORFF_TOL and d_back < HAUSDORFF_TOL
    results.append(
        (
            f"{fn}: two-sided Hausdorff vs catalog < {HAUSDORFF_TOL:g}",
            ok_h,
            f"catalog->slice {d_fwd:.2e}, slice->catalog {d_back:.2e}",
        )
    )

    worst_im = 0.0
    worst_mag = 0.0
    for b in s.branches:
        for x, y, _ in b.points:
            v = ex.evaluate(e, complex(x, y))
            worst_im = max(worst_im, abs(v.imag))
            worst_mag = max(worst_mag, abs(v))
    ok_sound = worst_im < g.im_tol and worst_mag < g.pole_cap
    results.append(
        (
            f"{fn}: all points re-evaluate on the locus",
            ok_sound,
            f"max |Im f| = {worst_im:.2e}",
        )
    )
    return results


def check_determinism(g: sl.GridSpec) -> tuple[str, bool, str]:
    e = ex.parse("sin(z)+2")
    w = sl.Window(-2 * math.pi, 2 * math.pi, -3.0, 3.0)
    docs = [
        write_document(sl.extract_slice(e, w, g)),
        write_document(sl.extract_slice(e, w, g)),
        write_document(sl.extract_slice(e, w, g, threads=4)),
    ]
    ok = docs[0] == docs[1] == docs[2]
    return ("determinism: identical bytes across runs and thread counts", ok, "")


def run_verify(grid: int = 256) -> list[tuple[str, bool, str]]:
    g = sl.GridSpec(nx=grid, ny=grid)
    results: list[tuple[str, bool, str]] = []
    for fn, w in _CASES:
        results.extend(check_function(fn, w, g))
    results.append(check_determinism(g))
    return results
