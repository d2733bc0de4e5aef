// UI wiring: inputs drive the serve API; documents drive the scene.

import { fetchRoots, fetchSlice } from "./api.js";
import { rootMarkers } from "./geometry.js";
import { SliceScene } from "./scene.js";
import {
  applyError,
  applyLevelWithoutRoots,
  applyRoots,
  applySlice,
  beginRequest,
  initialState,
  type ViewState,
} from "./state.js";
import { DocumentError } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let state: ViewState = initialState();
const scene = new SliceScene($("scene"));

const exprInput = $<HTMLInputElement>("expr");
const windowInput = $<HTMLInputElement>("window");
const gridInput = $<HTMLInputElement>("grid");
const targetInput = $<HTMLInputElement>("target");
const errorBox = $<HTMLDivElement>("error");
const rootList = $<HTMLUListElement>("roots");
const summary = $<HTMLDivElement>("summary");

exprInput.value = state.expression;
windowInput.value = state.window;
gridInput.value = String(state.grid);

function render(): void {
  errorBox.textContent = state.error ?? "";
  errorBox.style.display = state.error ? "block" : "none";
  if (state.doc) {
    const kinds = state.doc.branches.map((b) => b.kind);
    const real = kinds.filter((k) => k === "real-axis").length;
    summary.textContent =
      `${state.doc.expression}: ${kinds.length} branches ` +
      `(${real} real, ${kinds.length - real} non-real)`;
  } else {
    summary.textContent = "no slice loaded";
  }
  rootList.replaceChildren();
  if (state.rootsDoc) {
    for (const m of rootMarkers(state.rootsDoc)) {
      const li = document.createElement("li");
      li.textContent = m.label + (m.tangency ? " [tangency]" : "");
      if (m.pair !== null) li.title = `conjugate partner: root ${m.pair}`;
      rootList.appendChild(li);
    }
  }
}

function params() {
  return {
    expr: exprInput.value,
    window: windowInput.value,
    grid: Number(gridInput.value) || 256,
  };
}

async function loadSlice(): Promise<void> {
  const [next, seq] = beginRequest(state);
  state = next;
  try {
    const { doc, raw } = await fetchSlice("", params());
    state = applySlice(state, seq, doc, raw);
    if (state.doc === doc) {
      state = { ...state, expression: exprInput.value, window: windowInput.value };
      scene.setDocument(doc);
      scene.clearLevel();
    }
  } catch (err) {
    state = applyError(state, seq, err instanceof Error ? err.message : String(err));
  }
  render();
}

async function setLevel(): Promise<void> {
  const w = Number(targetInput.value);
  if (!Number.isFinite(w)) {
    state = { ...state, error: "level must be a finite number" };
    render();
    return;
  }
  const [next, seq] = beginRequest(state);
  state = next;
  try {
    const { doc, raw } = await fetchRoots("", params(), w);
    state = applyRoots(state, seq, w, doc, raw);
  } catch (err) {
    const message = err instanceof DocumentError ? err.message : "roots unavailable";
    state = applyLevelWithoutRoots(state, seq, w, `${message}; markers omitted`);
  }
  if (state.doc && state.target !== null) {
    scene.setLevel(
      state.doc,
      state.target,
      state.rootsDoc ? rootMarkers(state.rootsDoc) : [],
    );
  }
  render();
}

function exportDocument(): void {
  const raw = state.rawRoots ?? state.rawDoc;
  if (!raw) {
    state = { ...state, error: "nothing to export yet" };
    render();
    return;
  }
  // the export is the fetched document, byte for byte
  const blob = new Blob([raw], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "curveset.json";
  a.click();
  URL.revokeObjectURL(a.href);
}

$("load").addEventListener("click", () => void loadSlice());
$("set-level").addEventListener("click", () => void setLevel());
$("export").addEventListener("click", exportDocument);
exprInput.addEventListener("keydown", (e) => {
  if (e.key === "Enter") void loadSlice();
});
targetInput.addEventListener("keydown", (e) => {
  if (e.key === "Enter") void setLevel();
});

void loadSlice();
