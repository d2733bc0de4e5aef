"""Serialization: canonical curve-set JSON document, OBJ polylines, CSV.

The curve-set document is the stable interchange form of one slice plus
its roots (format_version "1").  Canonical encoding: UTF-8 JSON with
sorted keys, compact separators, shortest round-trip float formatting,
one trailing newline.  serialize -> parse -> serialize is byte-identical.

The OBJ export maps each slice point (x, y, v) to a vertex (x, y, z=v):
the function value is the height axis of the 3D scene, matching how the
curves are meant to be displayed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .roots import Root
from .slicer import Branch, GridSpec, SliceSet, Window

FORMAT_VERSION = "1"

AXES = {"x": "Re z", "y": "Im z", "v": "Re f(z)"}


class DocumentError(ValueError):
    pass


@dataclass
class CurveSetDocument:
    expression: str
    window: Window
    grid: GridSpec
    branches: list[Branch]
    roots: list[Root]
    diagnostics: dict[str, int]


def _doc_payload(doc: CurveSetDocument) -> dict[str, Any]:
    w, g = doc.window, doc.grid
    return {
        "format_version": FORMAT_VERSION,
        "axes": AXES,
        "expression": doc.expression,
        "window": {"x_min": w.x_min, "x_max": w.x_max, "y_min": w.y_min, "y_max": w.y_max},
        "grid": {
            "nx": g.nx,
            "ny": g.ny,
            "refine_iters": g.refine_iters,
            "im_tol": g.im_tol,
            "pole_cap": g.pole_cap,
        },
        "branches": [
            {
                "kind": b.kind,
                "anchor": b.anchor,
                "closed": b.closed,
                "points": {
                    "x": b.points[:, 0].tolist(),
                    "y": b.points[:, 1].tolist(),
                    "v": b.points[:, 2].tolist(),
                },
            }
            for b in doc.branches
        ],
        "roots": [
            {
                "re": r.z.real,
                "im": r.z.imag,
                "residual": r.residual,
                "branch": r.branch_index,
                "tangency": r.tangency,
                "verified": r.newton_verified,
                "pair": r.conjugate_partner,
            }
            for r in doc.roots
        ],
        "diagnostics": dict(doc.diagnostics),
    }


def document_bytes(doc: CurveSetDocument) -> bytes:
    payload = _doc_payload(doc)
    text = json.dumps(
        payload, sort_keys=True, separators=(",", ":"), allow_nan=False, ensure_ascii=True
    )
    return (text + "\n").encode("ascii")


def write_document(s: SliceSet, roots: list[Root] | None = None) -> bytes:
    """Canonical curve-set document for one slice and its roots."""
    doc = CurveSetDocument(
        expression=s.expression,
        window=s.window,
        grid=s.grid,
        branches=s.branches,
        roots=list(roots or []),
        diagnostics=dict(s.diagnostics),
    )
    return document_bytes(doc)


def read_document(data: bytes) -> CurveSetDocument:
    """Parse a curve-set document; raises DocumentError on malformed input."""
    try:
        payload = json.loads(data.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise DocumentError(f"not a curve-set document: {exc}") from exc
    if not isinstance(payload, dict):
        raise DocumentError("not a curve-set document: top level must be an object")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise DocumentError(f"unsupported format_version {version!r}")
    try:
        w = payload["window"]
        window = Window(w["x_min"], w["x_max"], w["y_min"], w["y_max"])
        g = payload["grid"]
        grid = GridSpec(g["nx"], g["ny"], g["refine_iters"], g["im_tol"], g["pole_cap"])
        branches = []
        for rec in payload["branches"]:
            pts = rec["points"]
            xs, ys, vs = pts["x"], pts["y"], pts["v"]
            if not (len(xs) == len(ys) == len(vs)):
                raise DocumentError("branch point arrays disagree in length")
            branches.append(
                Branch(
                    rec["kind"],
                    rec["anchor"],
                    np.column_stack([xs, ys, vs]) if xs else np.empty((0, 3)),
                    rec["closed"],
                )
            )
        roots = [
            Root(
                z=complex(rec["re"], rec["im"]),
                residual=rec["residual"],
                branch_index=rec["branch"],
                tangency=rec["tangency"],
                newton_verified=rec["verified"],
                conjugate_partner=rec["pair"],
            )
            for rec in payload["roots"]
        ]
        return CurveSetDocument(
            expression=payload["expression"],
            window=window,
            grid=grid,
            branches=branches,
            roots=roots,
            diagnostics=payload["diagnostics"],
        )
    except DocumentError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed curve-set document: {exc}") from exc


def _fmt(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def write_polylines(s: SliceSet) -> str:
    """OBJ text: one vertex per point, one `l` record per branch."""
    lines = [
        "# real-slice polylines: vertex = (Re z, Im z, Re f)",
        f"# expression: {s.expression}",
    ]
    index = 1
    for b in s.branches:
        for x, y, v in b.points:
            lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(v)}")
        n = len(b.points)
        if n:
            ids = list(range(index, index + n))
            if b.closed:
                ids.append(index)
            lines.append("l " + " ".join(str(i) for i in ids))
            index += n
    return "\n".join(lines) + "\n"


def write_csv(s: SliceSet) -> list[str]:
    """One CSV text per branch, columns x,y,v."""
    out = []
    for b in s.branches:
        rows = ["x,y,v"]
        for x, y, v in b.points:
            rows.append(f"{_fmt(x)},{_fmt(y)},{_fmt(v)}")
        out.append("\n".join(rows) + "\n")
    return out
