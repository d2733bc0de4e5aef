// Typed fetch wrappers over the realslice serve endpoints.

import { type CurveSetDocument, DocumentError, validateDocument } from "./types.js";

export interface SliceParams {
  expr: string;
  window: string;
  grid: number;
}

export function sliceUrl(base: string, p: SliceParams): string {
  const q = new URLSearchParams({ expr: p.expr, window: p.window, grid: String(p.grid) });
  return `${base}/api/slice?${q.toString()}`;
}

export function rootsUrl(base: string, p: SliceParams, target: number): string {
  const q = new URLSearchParams({
    expr: p.expr,
    window: p.window,
    grid: String(p.grid),
    target: String(target),
  });
  return `${base}/api/roots?${q.toString()}`;
}

export interface FetchedDocument {
  doc: CurveSetDocument;
  raw: string; // exact bytes as text; exporting returns this verbatim
}

async function fetchDocument(url: string): Promise<FetchedDocument> {
  const resp = await fetch(url);
  const raw = await resp.text();
  if (!resp.ok) {
    let message = `${resp.status}`;
    try {
      const parsed = JSON.parse(raw) as { error?: string };
      if (parsed.error) message = parsed.error;
    } catch {
      // non-JSON error body; keep the status code
    }
    throw new DocumentError(message);
  }
  return { doc: validateDocument(JSON.parse(raw)), raw };
}

export function fetchSlice(base: string, p: SliceParams): Promise<FetchedDocument> {
  return fetchDocument(sliceUrl(base, p));
}

export function fetchRoots(
  base: string,
  p: SliceParams,
  target: number,
): Promise<FetchedDocument> {
  return fetchDocument(rootsUrl(base, p, target));
}
