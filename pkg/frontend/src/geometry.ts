// Pure document-to-scene mapping. The viewer does no mathematics:
// every coordinate here is copied from the server document, only
// permuted into the scene's axis order.
//
// Scene axes are three.js convention (y up): document (x, y, v)
// becomes scene (x, v, y), so the function value is the height.

import type { Branch, BranchKind, CurveSetDocument, RootRecord } from "./types.js";

export const REAL_AXIS_COLOR = 0x2b6cb0; // blue: the familiar real graph
export const NON_REAL_COLOR = 0xcc2f2f; // red: non-real branches
export const MARKER_COLOR = 0xf2a900;
export const REAL_AXIS_WIDTH = 3;
export const NON_REAL_WIDTH = 2;

export function branchColor(kind: BranchKind): number {
  return kind === "real-axis" ? REAL_AXIS_COLOR : NON_REAL_COLOR;
}

export function branchWidth(kind: BranchKind): number {
  return kind === "real-axis" ? REAL_AXIS_WIDTH : NON_REAL_WIDTH;
}

/** Scene positions [x0, v0, y0, x1, v1, y1, ...] for one branch
 * (closed branches repeat their first point to close the loop). */
export function branchPositions(b: Branch): Float32Array {
  const n = b.points.x.length;
  const m = b.closed && n > 2 ? n + 1 : n;
  const out = new Float32Array(3 * m);
  for (let i = 0; i < m; i++) {
    const k = i % n;
    out[3 * i] = Math.fround(b.points.x[k]);
    out[3 * i + 1] = Math.fround(b.points.v[k]);
    out[3 * i + 2] = Math.fround(b.points.y[k]);
  }
  return out;
}

export interface BranchStyle {
  kind: BranchKind;
  color: number;
  width: number;
  positions: Float32Array;
}

export function sceneModel(doc: CurveSetDocument): BranchStyle[] {
  return doc.branches.map((b) => ({
    kind: b.kind,
    color: branchColor(b.kind),
    width: branchWidth(b.kind),
    positions: branchPositions(b),
  }));
}

export interface Marker {
  re: number; // exactly the document's numbers, never recomputed
  im: number;
  label: string;
  tangency: boolean;
  pair: number | null;
}

/** Root markers; the label shows (Re z, Im z) verbatim so conjugate
 * pairs are visible in the list. */
export function rootMarkers(doc: CurveSetDocument): Marker[] {
  return doc.roots.map((r: RootRecord) => ({
    re: r.re,
    im: r.im,
    label: `(${String(r.re)}, ${String(r.im)})`,
    tangency: r.tangency,
    pair: r.pair,
  }));
}

/** The level plane's corner coordinates at height w over the window. */
export function planeCorners(doc: CurveSetDocument, w: number): Float32Array {
  const { x_min, x_max, y_min, y_max } = doc.window;
  // two triangles covering the window rectangle at height w
  const quad = [
    [x_min, y_min],
    [x_max, y_min],
    [x_max, y_max],
    [x_min, y_min],
    [x_max, y_max],
    [x_min, y_max],
  ];
  const out = new Float32Array(18);
  quad.forEach(([x, y], i) => {
    out[3 * i] = Math.fround(x);
    out[3 * i + 1] = Math.fround(w);
    out[3 * i + 2] = Math.fround(y);
  });
  return out;
}
