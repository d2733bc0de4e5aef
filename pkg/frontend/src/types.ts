// Curve-set document types (format_version "1") and validation.
// The viewer trusts nothing it did not validate: wrong version or
// ragged point arrays are rejected before anything renders.

export interface BranchPoints {
  x: number[];
  y: number[];
  v: number[];
}

export type BranchKind =
  | "real-axis"
  | "vertical-line"
  | "horizontal-line"
  | "implicit-curve";

export interface Branch {
  kind: BranchKind;
  anchor: number | null;
  closed: boolean;
  points: BranchPoints;
}

export interface RootRecord {
  re: number;
  im: number;
  residual: number;
  branch: number | null;
  tangency: boolean;
  verified: boolean;
  pair: number | null;
}

export interface WindowSpec {
  x_min: number;
  x_max: number;
  y_min: number;
  y_max: number;
}

export interface CurveSetDocument {
  format_version: string;
  axes: { x: string; y: string; v: string };
  expression: string;
  window: WindowSpec;
  grid: { nx: number; ny: number; refine_iters: number; im_tol: number; pole_cap: number };
  branches: Branch[];
  roots: RootRecord[];
  diagnostics: Record<string, number>;
}

export class DocumentError extends Error {}

const KINDS = new Set(["real-axis", "vertical-line", "horizontal-line", "implicit-curve"]);

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function numberArray(v: unknown, what: string): number[] {
  if (!Array.isArray(v) || v.some((x) => typeof x !== "number")) {
    throw new DocumentError(`${what} must be an array of numbers`);
  }
  return v as number[];
}

export function validateDocument(data: unknown): CurveSetDocument {
  if (!isRecord(data)) throw new DocumentError("document must be a JSON object");
  if (data.format_version !== "1") {
    throw new DocumentError(`unsupported format_version ${String(data.format_version)}`);
  }
  if (typeof data.expression !== "string") throw new DocumentError("missing expression");
  if (!isRecord(data.window)) throw new DocumentError("missing window");
  for (const key of ["x_min", "x_max", "y_min", "y_max"]) {
    if (typeof (data.window as Record<string, unknown>)[key] !== "number") {
      throw new DocumentError(`window.${key} must be a number`);
    }
  }
  if (!Array.isArray(data.branches)) throw new DocumentError("missing branches");
  for (const b of data.branches) {
    if (!isRecord(b) || !KINDS.has(String(b.kind))) {
      throw new DocumentError("branch with unknown kind");
    }
    if (!isRecord(b.points)) throw new DocumentError("branch without points");
    const xs = numberArray(b.points.x, "points.x");
    const ys = numberArray(b.points.y, "points.y");
    const vs = numberArray(b.points.v, "points.v");
    if (xs.length !== ys.length || xs.length !== vs.length) {
      throw new DocumentError("branch point arrays disagree in length");
    }
  }
  if (!Array.isArray(data.roots)) throw new DocumentError("missing roots");
  for (const r of data.roots) {
    if (!isRecord(r) || typeof r.re !== "number" || typeof r.im !== "number") {
      throw new DocumentError("root without coordinates");
    }
  }
  return data as unknown as CurveSetDocument;
}

export function sameWindow(a: WindowSpec, b: WindowSpec): boolean {
  return (
    a.x_min === b.x_min && a.x_max === b.x_max && a.y_min === b.y_min && a.y_max === b.y_max
  );
}
