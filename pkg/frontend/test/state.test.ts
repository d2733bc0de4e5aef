import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  applyError,
  applyLevelWithoutRoots,
  applyRoots,
  applySlice,
  beginRequest,
  initialState,
} from "../src/state.js";
import { validateDocument } from "../src/types.js";

const sliceRaw = readFileSync(new URL("./fixtures/slice_sin_plus_2.json", import.meta.url), "utf-8");
const rootsRaw = readFileSync(new URL("./fixtures/roots_sin_plus_2_w0.json", import.meta.url), "utf-8");
const sliceDoc = validateDocument(JSON.parse(sliceRaw));
const rootsDoc = validateDocument(JSON.parse(rootsRaw));

function loaded() {
  const [s1, seq] = beginRequest(initialState());
  return applySlice(s1, seq, sliceDoc, sliceRaw);
}

describe("slice responses", () => {
  it("applies the latest response and keeps the raw bytes", () => {
    const s = loaded();
    expect(s.doc).toBe(sliceDoc);
    expect(s.rawDoc).toBe(sliceRaw);
    expect(s.error).toBeNull();
  });

  it("discards stale responses by sequence number", () => {
    let [s, seqOld] = beginRequest(initialState());
    let seqNew: number;
    [s, seqNew] = beginRequest(s);
    s = applySlice(s, seqNew, sliceDoc, sliceRaw);
    const after = applySlice(s, seqOld, rootsDoc, rootsRaw);
    expect(after).toBe(s); // old response ignored entirely
  });

  it("errors do not tear down the current scene", () => {
    let s = loaded();
    const [s2, seq] = beginRequest(s);
    s = applyError(s2, seq, "parse error");
    expect(s.doc).toBe(sliceDoc);
    expect(s.error).toBe("parse error");
  });
});

describe("roots responses", () => {
  it("accepts a matching roots document", () => {
    let s = loaded();
    const [s2, seq] = beginRequest(s);
    s = applyRoots(s2, seq, 0, rootsDoc, rootsRaw);
    expect(s.rootsDoc).toBe(rootsDoc);
    expect(s.target).toBe(0);
    expect(s.error).toBeNull();
  });

  it("rejects a roots document for a different expression", () => {
    let s = loaded();
    const mismatched = { ...rootsDoc, expression: "cosh(z)" };
    const [s2, seq] = beginRequest(s);
    s = applyRoots(s2, seq, 0, mismatched, rootsRaw);
    expect(s.rootsDoc).toBeNull();
    expect(s.error).toMatch(/does not match/);
    expect(s.doc).toBe(sliceDoc); // scene unchanged
  });

  it("rejects a roots document for a different window", () => {
    let s = loaded();
    const mismatched = { ...rootsDoc, window: { ...rootsDoc.window, y_max: 4 } };
    const [s2, seq] = beginRequest(s);
    s = applyRoots(s2, seq, 0, mismatched, rootsRaw);
    expect(s.rootsDoc).toBeNull();
    expect(s.error).toMatch(/does not match/);
  });

  it("network failure keeps the plane and omits markers", () => {
    let s = loaded();
    const [s2, seq] = beginRequest(s);
    s = applyLevelWithoutRoots(s2, seq, 1.5, "roots unavailable; markers omitted");
    expect(s.target).toBe(1.5);
    expect(s.rootsDoc).toBeNull();
    expect(s.error).toMatch(/markers omitted/);
  });
});

describe("export round trip", () => {
  it("the exported text is the fetched document, byte for byte", () => {
    let s = loaded();
    const [s2, seq] = beginRequest(s);
    s = applyRoots(s2, seq, 0, rootsDoc, rootsRaw);
    const exported = s.rawRoots ?? s.rawDoc;
    expect(exported).toBe(rootsRaw);
    expect(JSON.stringify(validateDocument(JSON.parse(exported!)))).toBe(
      JSON.stringify(rootsDoc),
    );
  });
});
