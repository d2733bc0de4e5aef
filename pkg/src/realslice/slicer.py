"""Numeric extraction of the real-slice locus Im f(z) = 0 over a window.

Pipeline: sample Im f on a padded rectangular grid, run marching squares
on the sign field (saddle cells disambiguated by a centre sample), link
the cell segments into polylines, polish every vertex with 1D Newton on
Im f along the locally steeper axis, then clean the topology: polylines
are split where they turn sharply (that is where two branches of the
locus cross and the discrete linker produced an L-joint), line-like
pieces are classified as real-axis / vertical / horizontal, stray
crossing vertices are trimmed off line pieces, and collinear pieces with
the same anchor are merged back into one branch when the gap between
them re-evaluates as part of the locus.  Poles never merge: a bridge is
only accepted when |f| stays under the pole cap at the gap midpoint.

Everything is deterministic: grid evaluation is row-by-row (threads only
distribute whole rows into a preallocated array), all iteration orders
are fixed, and the final branch list is sorted by kind, anchor and first
point.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex

KIND_REAL_AXIS = "real-axis"
KIND_VERTICAL = "vertical-line"
KIND_HORIZONTAL = "horizontal-line"
KIND_IMPLICIT = "implicit-curve"

KIND_ORDER = {KIND_REAL_AXIS: 0, KIND_VERTICAL: 1, KIND_HORIZONTAL: 2, KIND_IMPLICIT: 3}

# polyline cleanup thresholds (grid-cell units unless noted)
_BEND_COS = math.cos(math.radians(40.0))  # split polylines turning harder than 40 deg
_MERGE_GAP_CELLS = 2.25
_BRIDGE_IM_TOL = 1e-6  # absolute, bridge midpoint must look like locus
_LINE_SPREAD_CELLS = 1.5
_AXIS_ANCHOR_CELLS = 0.5
_DEBRIS_CELLS = 1.5
_EDGE_EPS = 1e-9


class SliceError(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        for name in ("x_min", "x_max", "y_min", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        vals = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise SliceError("window bounds must be finite")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise SliceError("window must satisfy x_min < x_max and y_min < y_max")


@dataclass(frozen=True)
class GridSpec:
    nx: int = 256
    ny: int = 256
    refine_iters: int = 3
    im_tol: float = 1e-9
    pole_cap: float = 1e6

    def __post_init__(self):
        for name in ("nx", "ny", "refine_iters"):
            object.__setattr__(self, name, int(getattr(self, name)))
        for name in ("im_tol", "pole_cap"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.nx < 8 or self.ny < 8:
            raise SliceError("grid must be at least 8x8 cells")
        if self.refine_iters < 0:
            raise SliceError("refine_iters must be non-negative")
        if not (0.0 < self.im_tol <= 1e-6):
            raise SliceError("im_tol must be in (0, 1e-6]")
        if self.pole_cap <= 0.0:
            raise SliceError("pole_cap must be positive")


@dataclass
class Branch:
    kind: str
    anchor: float | None
    points: np.ndarray  # (n, 3) columns x, y, v = Re f
    closed: bool = False

    def xy(self) -> np.ndarray:
        return self.points[:, :2]


@dataclass
class SliceSet:
    expression: str
    window: Window
    grid: GridSpec
    branches: list[Branch]
    diagnostics: dict[str, int] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Marching squares table.  Corner bits: 1=BL, 2=BR, 4=TR, 8=TL (positive sign).
# Edges: 0=bottom, 1=right, 2=top, 3=left.  Cases 5 and 10 are saddles.

_MS_SEGMENTS: dict[int, list[tuple[int, int]]] = {
    0: [], 15: [],
    1: [(3, 0)], 14: [(3, 0)],
    2: [(0, 1)], 13: [(0, 1)],
    3: [(3, 1)], 12: [(3, 1)],
    4: [(1, 2)], 11: [(1, 2)],
    6: [(0, 2)], 9: [(0, 2)],
    7: [(3, 2)], 8: [(3, 2)],
}
# saddle pairings keyed by (case, centre_positive)
_MS_SADDLE: dict[tuple[int, bool], list[tuple[int, int]]] = {
    (5, True): [(0, 1), (2, 3)],
    (5, False): [(3, 0), (1, 2)],
    (10, True): [(3, 0), (1, 2)],
    (10, False): [(0, 1), (2, 3)],
}


def _grid_axes(w: Window, g: GridSpec) -> tuple[np.ndarray, np.ndarray, float, float]:
    dx = (w.x_max - w.x_min) / g.nx
    dy = (w.y_max - w.y_min) / g.ny
    xs = np.concatenate(
        ([w.x_min - dx], np.linspace(w.x_min, w.x_max, g.nx + 1), [w.x_max + dx])
    )
    ys = np.concatenate(
        ([w.y_min - dy], np.linspace(w.y_min, w.y_max, g.ny + 1), [w.y_max + dy])
    )
    return xs, ys, dx, dy


def _sample_grid(e: ex.Expr, xs: np.ndarray, ys: np.ndarray, threads: int) -> np.ndarray:
    out = np.empty((ys.size, xs.size), dtype=np.complex128)

    def one_row(j: int) -> None:
        out[j, :] = ex.eval_vec(e, xs + 1j * ys[j])

    if threads <= 1:
        for j in range(ys.size):
            one_row(j)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one_row, range(ys.size)))
    return out


class _Extraction:
    """Mutable state for one extract_slice run."""

    def __init__(self, e: ex.Expr, w: Window, g: GridSpec, threads: int):
        self.e = e
        self.de = ex.differentiate(e)
        self.w = w
        self.g = g
        self.threads = max(1, int(threads))
        self.diag: dict[str, int] = {}

    # -- sampling and marching squares ------------------------------------

    def run(self) -> SliceSet:
        w, g = self.w, self.g
        xs, ys, dx, dy = _grid_axes(w, g)
        self.xs, self.ys, self.dx, self.dy = xs, ys, dx, dy
        F = _sample_grid(self.e, xs, ys, self.threads)
        valid = np.isfinite(F.real) & np.isfinite(F.imag)
        valid[valid] &= np.abs(F[valid]) < g.pole_cap
        imf = F.imag
        signs = valid & (imf > 0.0)  # masked nodes read as non-positive

        cell_ok = valid[:-1, :-1] & valid[:-1, 1:] & valid[1:, 1:] & valid[1:, :-1]
        n_cells = cell_ok.size
        self.diag["cells"] = int(n_cells)
        self.diag["masked_cells"] = int(n_cells - int(cell_ok.sum()))
        core = cell_ok[1:-1, 1:-1]
        if not core.any():
            raise SliceError("expression evaluates nowhere in the window")

        cases = (
            signs[:-1, :-1].astype(np.int8)
            + 2 * signs[:-1, 1:]
            + 4 * signs[1:, 1:]
            + 8 * signs[1:, :-1]
        )
        active = cell_ok & (cases != 0) & (cases != 15)

        self._build_vertices(F, imf, signs, valid)
        segments, adj = self._build_segments(cases, active)
        chains = _link_chains(len(self.vx), segments, adj)
        self._refine_vertices(F)
        pieces = self._clean_chains(chains)
        branches = self._assemble(pieces)
        return SliceSet(
            expression=ex.to_text(self.e),
            window=w,
            grid=g,
            branches=branches,
            diagnostics=self.diag,
        )

    def _build_vertices(self, F, imf, signs, valid) -> None:
        xs, ys, dx, dy = self.xs, self.ys, self.dx, self.dy
        H, W = imf.shape
        # crossings on horizontal edges (sign changes along x) ...
        hmask = valid[:, :-1] & valid[:, 1:] & (signs[:, :-1] != signs[:, 1:])
        # ... and on vertical edges (sign changes along y)
        vmask = valid[:-1, :] & valid[1:, :] & (signs[:-1, :] != signs[1:, :])

        hj, hi = np.nonzero(hmask)
        v0 = imf[hj, hi]
        v1 = imf[hj, hi + 1]
        t = np.clip(v0 / (v0 - v1), 0.0, 1.0)
        hx = xs[hi] + t * (xs[hi + 1] - xs[hi])
        hy = ys[hj]

        vj, vi = np.nonzero(vmask)
        u0 = imf[vj, vi]
        u1 = imf[vj + 1, vi]
        s = np.clip(u0 / (u0 - u1), 0.0, 1.0)
        vx_ = xs[vi]
        vy_ = ys[vj] + s * (ys[vj + 1] - ys[vj])

        self.vx = np.concatenate([hx, vx_])
        self.vy = np.concatenate([hy, vy_])
        nh = hx.size
        # clamp boxes: stay within one cell of the owning edge
        self.blx = np.concatenate([xs[hi], vx_ - dx])
        self.bhx = np.concatenate([xs[hi + 1], vx_ + dx])
        self.bly = np.concatenate([hy - dy, ys[vj]])
        self.bhy = np.concatenate([hy + dy, ys[vj + 1]])
        # edge key -> vertex id
        key_h = (hj.astype(np.int64) * W + hi) * 2
        key_v = (vj.astype(np.int64) * W + vi) * 2 + 1
        self.vertex_of_edge = dict(zip(key_h.tolist(), range(nh)))
        self.vertex_of_edge.update(zip(key_v.tolist(), range(nh, nh + vx_.size)))
        self.W = W

    def _edge_key(self, i: int, j: int, code: int) -> int:
        W = self.W
        if code == 0:  # bottom
            return (j * W + i) * 2
        if code == 2:  # top
            return ((j + 1) * W + i) * 2
        if code == 3:  # left
            return (j * W + i) * 2 + 1
        return (j * W + i + 1) * 2 + 1  # right

    def _build_segments(self, cases, active):
        aj, ai = np.nonzero(active)
        order = np.lexsort((ai, aj))
        aj, ai = aj[order], ai[order]
        cell_cases = cases[aj, ai]

        # centre samples for saddle cells, evaluated in one deterministic batch
        saddle_sel = (cell_cases == 5) | (cell_cases == 10)
        self.diag["saddle_cells"] = int(saddle_sel.sum())
        centre_pos: dict[tuple[int, int], bool] = {}
        if saddle_sel.any():
            sj, si = aj[saddle_sel], ai[saddle_sel]
            cxs = 0.5 * (self.xs[si] + self.xs[si + 1])
            cys = 0.5 * (self.ys[sj] + self.ys[sj + 1])
            cv = ex.eval_vec(self.e, cxs + 1j * cys)
            good = np.isfinite(cv.imag)
            for j, i, im, ok in zip(sj.tolist(), si.tolist(), cv.imag.tolist(), good.tolist()):
                centre_pos[(j, i)] = bool(ok and im > 0.0)

        segments: list[tuple[int, int]] = []
        nverts = len(self.vx)
        adj: list[list[tuple[int, int]]] = [[] for _ in range(nverts)]
        self.vcell = np.full(nverts, -1, dtype=np.int64)
        for j, i, case in zip(aj.tolist(), ai.tolist(), cell_cases.tolist()):
            if case in (5, 10):
                pairs = _MS_SADDLE[(case, centre_pos[(j, i)])]
            else:
                pairs = _MS_SEGMENTS[case]
            for ea, eb in pairs:
                va = self.vertex_of_edge[self._edge_key(i, j, ea)]
                vb = self.vertex_of_edge[self._edge_key(i, j, eb)]
                sid = len(segments)
                segments.append((va, vb))
                adj[va].append((vb, sid))
                adj[vb].append((va, sid))
                cid = j * (self.W - 1) + i
                for v in (va, vb):
                    if self.vcell[v] < 0:
                        self.vcell[v] = cid
        return segments, adj

    # -- refinement ---------------------------------------------------------

    def _refine_vertices(self, F_grid) -> None:
        g = self.g
        n = len(self.vx)
        self.vF = np.zeros(n, dtype=np.complex128)
        self.vconv = np.zeros(n, dtype=bool)
        self.vsing = np.zeros(n, dtype=bool)
        if n == 0:
            self.diag["singular_vertices"] = 0
            self.diag["dropped_unconverged"] = 0
            return
        px, py = self.vx, self.vy
        z = px + 1j * py
        F = ex.eval_vec(self.e, z)
        dF = ex.eval_vec(self.de, z)
        finite = np.isfinite(F.real) & np.isfinite(F.imag)
        conv = finite & (np.abs(F.imag) < g.im_tol)
        # slope of Im f along x is Im f'; along y it is Re f'
        slope_x = dF.imag
        slope_y = dF.real
        use_x = np.abs(slope_x) >= np.abs(slope_y)
        singular = np.zeros(n, dtype=bool)

        for _ in range(g.refine_iters):
            act = finite & ~conv & ~singular
            if not act.any():
                break
            slope = np.where(use_x, slope_x, slope_y)
            with np.errstate(all="ignore"):
                step = -F.imag / slope
            bad = ~np.isfinite(step)
            singular |= act & bad
            act &= ~bad
            move = np.where(act, step, 0.0)
            px = np.where(use_x, np.clip(px + move, self.blx, self.bhx), px)
            py = np.where(~use_x, np.clip(py + move, self.bly, self.bhy), py)
            z = px + 1j * py
            idx = np.nonzero(act)[0]
            Fi = ex.eval_vec(self.e, z[idx])
            dFi = ex.eval_vec(self.de, z[idx])
            F[idx] = Fi
            dF[idx] = dFi
            slope_x = dF.imag
            slope_y = dF.real
            finite = np.isfinite(F.real) & np.isfinite(F.imag)
            conv = finite & (np.abs(F.imag) < g.im_tol)

        self.vx, self.vy, self.vF = px, py, F
        # with no refinement requested, raw lerp vertices are the contract;
        # otherwise unconverged vertices are dropped so every emitted point
        # satisfies |Im f| < im_tol
        ok = finite.copy() if g.refine_iters == 0 else (conv & finite)
        ok[ok] &= np.abs(F[ok]) < g.pole_cap
        # clip to the window: halo vertices and escapes are dropped
        exx = _EDGE_EPS * max(1.0, abs(self.w.x_min), abs(self.w.x_max))
        eyy = _EDGE_EPS * max(1.0, abs(self.w.y_min), abs(self.w.y_max))
        ok &= (px >= self.w.x_min - exx) & (px <= self.w.x_max + exx)
        ok &= (py >= self.w.y_min - eyy) & (py <= self.w.y_max + eyy)
        self.vok = ok
        self.diag["singular_vertices"] = int(singular.sum())
        self.vsing = singular
        self.diag["dropped_unconverged"] = (
            0 if g.refine_iters == 0 else int((~conv & finite).sum())
        )

    # -- topology cleanup ---------------------------------------------------

    def _clean_chains(self, chains: list[tuple[list[int], bool]]):
        dx, dy = self.dx, self.dy
        pieces: list[dict] = []
        bend_cells: set[int] = set()
        n_bends = 0
        for vids, closed in chains:
            runs = _split_on_mask(vids, self.vok, closed)
            for run, still_closed in runs:
                run = _dedupe_consecutive(run, self.vx, self.vy, dx, dy)
                if len(run) < 2:
                    continue
                subs, bent_at = _split_bends(run, still_closed, self.vx, self.vy, dx, dy)
                n_bends += len(bent_at)
                for v in bent_at:
                    bend_cells.add(int(self.vcell[v]))
                for sub, sub_closed in subs:
                    if len(sub) >= 2:
                        pieces.append(
                            {
                                "x": self.vx[sub].copy(),
                                "y": self.vy[sub].copy(),
                                "v": self.vF[sub].real.copy(),
                                "closed": sub_closed,
                            }
                        )
        self.diag["bend_splits"] = n_bends
        sing_cells = set(int(c) for c in self.vcell[self.vsing] if c >= 0)
        self.diag["singular_cells"] = len(bend_cells | sing_cells)
        return pieces

    def _assemble(self, pieces: list[dict]) -> list[Branch]:
        dx, dy = self.dx, self.dy
        trimmed = 0
        classified: list[dict] = []
        for p in pieces:
            kind, anchor = _classify(p["x"], p["y"], dx, dy)
            if kind in (KIND_REAL_AXIS, KIND_VERTICAL, KIND_HORIZONTAL):
                t = _trim_line_piece(p, kind, anchor, dx, dy)
                trimmed += t
                if len(p["x"]) < 2:
                    continue
                kind, anchor = _classify(p["x"], p["y"], dx, dy)
            p["kind"], p["anchor"] = kind, anchor
            _orient_piece(p)
            classified.append(p)
        self.diag["trimmed_points"] = trimmed

        merged = self._merge_lines(classified)
        final = self._drop_debris(merged)
        final.sort(key=_branch_sort_key)
        out = []
        for p in final:
            pts = np.column_stack([p["x"], p["y"], p["v"]])
            out.append(Branch(p["kind"], p["anchor"], pts, p["closed"]))
        return out

    def _merge_lines(self, pieces: list[dict]) -> list[dict]:
        dx, dy = self.dx, self.dy
        out = [p for p in pieces if p["kind"] == KIND_IMPLICIT]
        for kind in (KIND_REAL_AXIS, KIND_VERTICAL, KIND_HORIZONTAL):
            group = [p for p in pieces if p["kind"] == kind]
            if not group:
                continue
            free, cell = ("y", dy) if kind == KIND_VERTICAL else ("x", dx)
            perp_cell = dx if kind == KIND_VERTICAL else dy
            group.sort(key=lambda p: (p["anchor"] or 0.0, p[free][0]))
            clusters: list[list[dict]] = [[group[0]]]
            for p in group[1:]:
                prev = clusters[-1][-1]
                same_line = kind == KIND_REAL_AXIS or abs(
                    (p["anchor"] or 0.0) - (prev["anchor"] or 0.0)
                ) <= _AXIS_ANCHOR_CELLS * perp_cell
                if same_line:
                    clusters[-1].append(p)
                else:
                    clusters.append([p])
            for cluster in clusters:
                out.extend(self._merge_cluster(cluster, kind, free, cell))
        return out

    def _merge_cluster(self, cluster: list[dict], kind, free, cell) -> list[dict]:
        merged: list[dict] = [cluster[0]]
        for p in cluster[1:]:
            last = merged[-1]
            gap = p[free][0] - last[free][-1]
            if -0.25 * cell <= gap <= _MERGE_GAP_CELLS * cell and self._bridge_ok(
                last["x"][-1], last["y"][-1], p["x"][0], p["y"][0]
            ):
                for col in ("x", "y", "v"):
                    last[col] = np.concatenate([last[col], p[col]])
                order = np.argsort(last[free], kind="stable")
                for col in ("x", "y", "v"):
                    last[col] = last[col][order]
                last["closed"] = False
            else:
                merged.append(p)
        for p in merged:
            if kind == KIND_REAL_AXIS:
                p["anchor"] = None
            else:
                coord = p["x"] if kind == KIND_VERTICAL else p["y"]
                p["anchor"] = float(np.median(coord))
        return merged

    def _bridge_ok(self, x0, y0, x1, y1) -> bool:
        mid = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        try:
            v = ex.evaluate(self.e, mid)
        except ex.EvalError:
            return False
        return abs(v.imag) < _BRIDGE_IM_TOL and abs(v) < self.g.pole_cap

    def _drop_debris(self, branches: list[dict]) -> list[dict]:
        dx, dy = self.dx, self.dy
        keep: list[dict] = []
        dropped = 0
        big = [b for b in branches if len(b["x"]) >= 3]
        for b in branches:
            if len(b["x"]) < 2:
                dropped += 1
                continue
            if len(b["x"]) < 3:
                pts = np.column_stack([b["x"] / dx, b["y"] / dy])
                near = False
                for other in big:
                    if other is b:
                        continue
                    poly = np.column_stack([other["x"] / dx, other["y"] / dy])
                    d = points_to_polyline_distance(pts, poly)
                    if np.all(d <= _DEBRIS_CELLS):
                        near = True
                        break
                if near:
                    dropped += 1
                    continue
            keep.append(b)
        self.diag["dropped_fragments"] = dropped
        return keep


# ---------------------------------------------------------------------------
# chain helpers


def _link_chains(nverts, segments, adj) -> list[tuple[list[int], bool]]:
    used = [False] * len(segments)
    chains: list[tuple[list[int], bool]] = []

    def walk(start: int) -> list[int]:
        chain = [start]
        cur = start
        while True:
            nxt = None
            for other, sid in adj[cur]:
                if not used[sid]:
                    used[sid] = True
                    nxt = other
                    break
            if nxt is None:
                return chain
            chain.append(nxt)
            cur = nxt

    for v in range(nverts):
        if len(adj[v]) == 1 and not used[adj[v][0][1]]:
            chains.append((walk(v), False))
    for v in range(nverts):
        if any(not used[sid] for _, sid in adj[v]):
            chain = walk(v)
            closed = len(chain) > 2 and chain[0] == chain[-1]
            if closed:
                chain = chain[:-1]
            chains.append((chain, closed))
    return chains


def _split_on_mask(vids, ok, closed) -> list[tuple[list[int], bool]]:
    if all(ok[v] for v in vids):
        return [(list(vids), closed)]
    if closed:
        # rotate so the chain starts right after a dropped vertex
        first_bad = next(k for k, v in enumerate(vids) if not ok[v])
        vids = vids[first_bad + 1 :] + vids[: first_bad + 1]
    runs: list[tuple[list[int], bool]] = []
    cur: list[int] = []
    for v in vids:
        if ok[v]:
            cur.append(v)
        elif cur:
            runs.append((cur, False))
            cur = []
    if cur:
        runs.append((cur, False))
    return runs


def _dedupe_consecutive(run, vx, vy, dx, dy) -> list[int]:
    out = [run[0]]
    for v in run[1:]:
        u = out[-1]
        if abs(vx[v] - vx[u]) > 1e-9 * dx or abs(vy[v] - vy[u]) > 1e-9 * dy:
            out.append(v)
    return out


def _split_bends(run, closed, vx, vy, dx, dy):
    """Split a chain wherever consecutive segments turn by more than the
    bend threshold (in cell-normalised coordinates).  Returns the list of
    (sub-run, closed) pieces and the vertices where splits happened."""
    n = len(run)
    if n < 3:
        return [(run, closed)], []
    ux = np.diff(vx[run]) / dx
    uy = np.diff(vy[run]) / dy
    if closed:
        ux = np.append(ux, (vx[run[0]] - vx[run[-1]]) / dx)
        uy = np.append(uy, (vy[run[0]] - vy[run[-1]]) / dy)
    norm = np.hypot(ux, uy)
    norm[norm == 0] = 1.0
    ux, uy = ux / norm, uy / norm
    m = ux.size
    split_at: list[int] = []  # index into run of the bend vertex
    for k in range(1 if not closed else 0, m):
        ca = ux[k - 1] * ux[k] + uy[k - 1] * uy[k]
        if ca < _BEND_COS:
            split_at.append(k if not closed else k % n)
    if not split_at:
        return [(run, closed)], []
    bent = [run[k] for k in split_at]
    if closed:
        # open the cycle at the first bend, then split linearly
        k0 = split_at[0]
        run = run[k0:] + run[: k0 + 1]
        shifted = sorted((k - k0) % n for k in split_at[1:])
        cuts = [k for k in shifted if 0 < k < len(run) - 1]
    else:
        cuts = split_at
    pieces = []
    prev = 0
    for k in cuts:
        pieces.append((run[prev : k + 1], False))
        prev = k
    pieces.append((run[prev:], False))
    return [(p, c) for p, c in pieces if len(p) >= 2], bent


def _classify(xarr, yarr, dx, dy) -> tuple[str, float | None]:
    x_spread = float(xarr.max() - xarr.min())
    y_spread = float(yarr.max() - yarr.min())
    vert = x_spread < _LINE_SPREAD_CELLS * dx
    horiz = y_spread < _LINE_SPREAD_CELLS * dy
    if vert and not horiz:
        return KIND_VERTICAL, float(np.median(xarr))
    if horiz and not vert:
        anchor = float(np.median(yarr))
        if abs(anchor) < _AXIS_ANCHOR_CELLS * dy:
            return KIND_REAL_AXIS, None
        return KIND_HORIZONTAL, anchor
    return KIND_IMPLICIT, None


def _trim_line_piece(p, kind, anchor, dx, dy) -> int:
    """Drop endpoint vertices that sit off the fitted line (crossing
    debris); interior points are never touched."""
    if kind == KIND_VERTICAL:
        coord, ref, cell = p["x"], anchor, dx
    else:
        coord, ref, cell = p["y"], (anchor or 0.0), dy
    tol = max(1e-6 * max(1.0, abs(ref)), 1e-3 * cell)
    n = len(coord)
    lo = 0
    hi = n
    while lo < hi and abs(coord[lo] - ref) > tol:
        lo += 1
    while hi > lo and abs(coord[hi - 1] - ref) > tol:
        hi -= 1
    removed = n - (hi - lo)
    if removed:
        for col in ("x", "y", "v"):
            p[col] = p[col][lo:hi]
        p["closed"] = False
    return removed


def _orient_piece(p) -> None:
    if p["kind"] in (KIND_REAL_AXIS, KIND_HORIZONTAL):
        order = np.argsort(p["x"], kind="stable")
    elif p["kind"] == KIND_VERTICAL:
        order = np.argsort(p["y"], kind="stable")
    else:
        if p["closed"]:
            pts = list(zip(p["x"].tolist(), p["y"].tolist()))
            k0 = min(range(len(pts)), key=lambda k: pts[k])
            idx = list(range(k0, len(pts))) + list(range(0, k0))
            if len(idx) > 2 and pts[idx[-1]] < pts[idx[1]]:
                idx = [idx[0]] + idx[1:][::-1]
            order = np.array(idx)
        else:
            first = (p["x"][0], p["y"][0])
            last = (p["x"][-1], p["y"][-1])
            order = (
                np.arange(len(p["x"]))
                if first <= last
                else np.arange(len(p["x"]))[::-1]
            )
    for col in ("x", "y", "v"):
        p[col] = p[col][order]


def _branch_sort_key(p) -> tuple:
    return (
        KIND_ORDER[p["kind"]],
        p["anchor"] if p["anchor"] is not None else 0.0,
        float(p["x"][0]),
        float(p["y"][0]),
    )


# ---------------------------------------------------------------------------
# public operations


def extract_slice(
    e: ex.Expr, w: Window, g: GridSpec | None = None, *, threads: int = 1
) -> SliceSet:
    """Extract the real-slice curves of e over the window.

    threads distributes grid rows over worker threads; the output is
    byte-for-byte independent of the thread count.
    """
    if g is None:
        g = GridSpec()
    return _Extraction(e, w, g, threads).run()


@dataclass(frozen=True)
class RefineResult:
    x: float
    y: float
    im_f: float
    converged: bool
    singular: bool
    iterations: int


def refine_point(
    e: ex.Expr,
    x: float,
    y: float,
    axis: str,
    *,
    im_tol: float = 1e-9,
    max_iters: int = 40,
    bounds: tuple[float, float] | None = None,
    derivative: ex.Expr | None = None,
) -> RefineResult:
    """1D Newton polish of (x, y) along one axis until |Im f| < im_tol.

    A vanishing directional derivative flags the point singular (genuine
    crossings of the locus); the caller keeps the unrefined vertex.
    """
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    de = derivative if derivative is not None else ex.differentiate(e)
    cur_x, cur_y = float(x), float(y)
    it = 0
    singular = False
    while True:
        f = ex.evaluate(e, complex(cur_x, cur_y))
        imf = f.imag
        if abs(imf) < im_tol:
            d = ex.evaluate(de, complex(cur_x, cur_y))
            slope = d.imag if axis == "x" else d.real
            singular = abs(slope) < 1e-12 * (1.0 + abs(f))
            return RefineResult(cur_x, cur_y, imf, True, singular, it)
        if it >= max_iters:
            return RefineResult(cur_x, cur_y, imf, False, singular, it)
        d = ex.evaluate(de, complex(cur_x, cur_y))
        slope = d.imag if axis == "x" else d.real
        if abs(slope) < 1e-12 * (1.0 + abs(f)):
            return RefineResult(cur_x, cur_y, imf, False, True, it)
        step = -imf / slope
        if axis == "x":
            cur_x += step
            if bounds:
                cur_x = min(max(cur_x, bounds[0]), bounds[1])
        else:
            cur_y += step
            if bounds:
                cur_y = min(max(cur_y, bounds[0]), bounds[1])
        it += 1


# ---------------------------------------------------------------------------
# polyline distance utilities (shared by tests and the verify command)


def points_to_polyline_distance(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each point (m, 2) to a polyline (n, 2), n >= 1."""
    pts = np.asarray(points, dtype=float)
    pl = np.asarray(poly, dtype=float)
    if pl.shape[0] == 1:
        return np.hypot(pts[:, 0] - pl[0, 0], pts[:, 1] - pl[0, 1])
    a = pl[:-1]
    b = pl[1:]
    ab = b - a
    ab2 = (ab * ab).sum(axis=1)
    ab2[ab2 == 0] = 1.0
    best = np.full(pts.shape[0], np.inf)
    chunk = max(1, int(2e6 / max(1, a.shape[0])))
    for k in range(0, pts.shape[0], chunk):
        p = pts[k : k + chunk]
        ap = p[:, None, :] - a[None, :, :]
        t = np.clip((ap * ab[None, :, :]).sum(axis=2) / ab2[None, :], 0.0, 1.0)
        proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
        d = np.hypot(p[:, None, 0] - proj[:, :, 0], p[:, None, 1] - proj[:, :, 1])
        best[k : k + chunk] = d.min(axis=1)
    return best


def points_to_branches_distance(points: np.ndarray, branches: list[Branch]) -> np.ndarray:
    """Distance from each point to the union of branch polylines."""
    pts = np.asarray(points, dtype=float)
    best = np.full(pts.shape[0], np.inf)
    for b in branches:
        poly = b.xy()
        if b.closed and poly.shape[0] > 2:
            poly = np.vstack([poly, poly[:1]])
        best = np.minimum(best, points_to_polyline_distance(pts, poly))
    return best


def directed_hausdorff(points: np.ndarray, branches: list[Branch]) -> float:
    """sup over points of the distance to the union of branch polylines."""
    if len(points) == 0:
        return 0.0
    return float(points_to_branches_distance(points, branches).max())
