// View state and response bookkeeping: one in-flight request per
// control, stale responses discarded by sequence number, roots
// documents rejected unless they match the loaded slice.

import { type CurveSetDocument, sameWindow } from "./types.js";

export interface ViewState {
  expression: string;
  window: string; // xmin:xmax:ymin:ymax, as typed
  grid: number;
  target: number | null;
  doc: CurveSetDocument | null;
  rawDoc: string | null; // exact response text, for export round-trips
  rootsDoc: CurveSetDocument | null;
  rawRoots: string | null;
  error: string | null;
  seq: number; // last issued request id
  appliedSeq: number; // last applied response id
}

export function initialState(): ViewState {
  return {
    expression: "sin(z)+2",
    window: "-6.283185307179586:6.283185307179586:-3:3",
    grid: 256,
    target: null,
    doc: null,
    rawDoc: null,
    rootsDoc: null,
    rawRoots: null,
    error: null,
    seq: 0,
    appliedSeq: 0,
  };
}

export function beginRequest(s: ViewState): [ViewState, number] {
  const seq = s.seq + 1;
  return [{ ...s, seq }, seq];
}

function stale(s: ViewState, seq: number): boolean {
  return seq !== s.seq || seq <= s.appliedSeq;
}

export function applySlice(
  s: ViewState,
  seq: number,
  doc: CurveSetDocument,
  raw: string,
): ViewState {
  if (stale(s, seq)) return s;
  return {
    ...s,
    doc,
    rawDoc: raw,
    rootsDoc: null,
    rawRoots: null,
    target: null,
    error: null,
    appliedSeq: seq,
  };
}

export function applyRoots(
  s: ViewState,
  seq: number,
  w: number,
  doc: CurveSetDocument,
  raw: string,
): ViewState {
  if (stale(s, seq)) return s;
  if (s.doc === null) {
    return { ...s, error: "load a slice before setting a level", appliedSeq: seq };
  }
  if (doc.expression !== s.doc.expression || !sameWindow(doc.window, s.doc.window)) {
    // a roots document for some other scene must never decorate this one
    return {
      ...s,
      error: "roots response does not match the loaded slice; ignored",
      appliedSeq: seq,
    };
  }
  return {
    ...s,
    target: w,
    rootsDoc: doc,
    rawRoots: raw,
    error: null,
    appliedSeq: seq,
  };
}

export function applyLevelWithoutRoots(s: ViewState, seq: number, w: number, message: string): ViewState {
  if (stale(s, seq)) return s;
  // network failure: the plane is still drawn, markers are omitted
  return { ...s, target: w, rootsDoc: null, rawRoots: null, error: message, appliedSeq: seq };
}

export function applyError(s: ViewState, seq: number, message: string): ViewState {
  if (stale(s, seq)) return s;
  // errors never tear down the current scene
  return { ...s, error: message, appliedSeq: seq };
}
