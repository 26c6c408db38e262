/** Browser entry point: DOM wiring over the controller (no framework). */

import { ApiClient } from "./api.js";
import { WorkbenchController } from "./controller.js";
import { filterLexicon, type DiffView, type GlossView } from "./model.js";
import type { LexiconEntryOut } from "./types.js";

const baseUrl =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8077";
const api = new ApiClient(baseUrl);
const controller = new WorkbenchController(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function changedKey(diff: DiffView): Set<string> {
  return new Set(diff.changed.map((c) => `${c.wordIndex}:${c.cellIndex}`));
}

function renderView(view: GlossView, diff?: DiffView): void {
  el<HTMLSpanElement>("version-badge").textContent = `lexicon v${view.lexiconVersion}`;
  const changed = diff ? changedKey(diff) : new Set<string>();
  const table = el<HTMLDivElement>("gloss-table");
  table.innerHTML = "";
  view.words.forEach((word, w) => {
    const column = document.createElement("div");
    column.className = "word-column" + (word.isPunctuation ? " punct" : "");
    const surface = document.createElement("div");
    surface.className = "surface";
    surface.textContent = word.surface;
    surface.title = `log p = ${word.logProb.toFixed(3)}`;
    column.appendChild(surface);
    word.cells.forEach((cell, c) => {
      const node = document.createElement("div");
      node.className = "cell";
      if (cell.lowConfidence) node.classList.add("low-confidence");
      if (changed.has(`${w}:${c}`)) node.classList.add("changed");
      node.innerHTML = `<span class="segment"></span><span class="gloss"></span>` +
        `<span class="prob"></span>`;
      (node.querySelector(".segment") as HTMLElement).textContent = cell.segment;
      (node.querySelector(".gloss") as HTMLElement).textContent = cell.gloss;
      (node.querySelector(".prob") as HTMLElement).textContent =
        cell.prob.toFixed(2);
      node.addEventListener("click", () => {
        const lines = cell.alternatives
          .map((a) => `${a.segment} : ${a.gloss}  (${a.prob.toFixed(3)})`)
          .join("\n");
        el<HTMLPreElement>("alternatives").textContent =
          lines || "(no alternatives returned)";
      });
      column.appendChild(node);
    });
    table.appendChild(column);
  });
  el<HTMLSpanElement>("diff-note").textContent = diff
    ? `${diff.changed.length} cell(s) changed (v${diff.previousVersion} -> v${diff.currentVersion})`
    : "";
}

async function refreshLexicon(): Promise<void> {
  const [listing, info] = await Promise.all([api.lexicon(), api.info()]);
  const query = el<HTMLInputElement>("lexicon-search").value;
  const provenance = el<HTMLSelectElement>("provenance-filter").value as
    | ""
    | LexiconEntryOut["provenance"];
  const rows = filterLexicon(listing.entries, {
    query,
    provenance: provenance || undefined,
  });
  el<HTMLSpanElement>("lexicon-count").textContent =
    `${rows.length} shown / ${info.lexicon_size} total (v${info.lexicon_version})`;
  const body = el<HTMLTableSectionElement>("lexicon-body");
  body.innerHTML = "";
  for (const entry of rows) {
    const tr = document.createElement("tr");
    tr.className = `prov-${entry.provenance}`;
    tr.innerHTML = `<td></td><td></td><td></td>`;
    const cells = tr.querySelectorAll("td");
    cells[0].textContent = entry.segment;
    cells[1].textContent = entry.gloss;
    cells[2].textContent = entry.provenance;
    body.appendChild(tr);
  }
}

function showError(err: unknown): void {
  el<HTMLDivElement>("error").textContent = String(err);
}

export function wire(): void {
  el<HTMLButtonElement>("gloss-button").addEventListener("click", async () => {
    el<HTMLDivElement>("error").textContent = "";
    try {
      controller.threshold = Number(el<HTMLInputElement>("threshold").value);
      const view = await controller.loadSentence(
        el<HTMLInputElement>("transcription").value,
        el<HTMLInputElement>("translation").value || undefined,
      );
      renderView(view);
    } catch (err) {
      showError(err);
    }
  });

  el<HTMLButtonElement>("add-button").addEventListener("click", async () => {
    el<HTMLDivElement>("error").textContent = "";
    try {
      const outcome = await controller.addEntryFlow(
        el<HTMLInputElement>("new-segment").value.trim(),
        el<HTMLInputElement>("new-gloss").value.trim(),
      );
      renderView(outcome.view, outcome.diff);
      if (outcome.notice) el<HTMLDivElement>("error").textContent = outcome.notice;
      await refreshLexicon();
    } catch (err) {
      showError(err);
    }
  });

  el<HTMLInputElement>("lexicon-search").addEventListener("input", () => {
    refreshLexicon().catch(showError);
  });
  el<HTMLSelectElement>("provenance-filter").addEventListener("change", () => {
    refreshLexicon().catch(showError);
  });

  refreshLexicon().catch(showError);
}

if (typeof document !== "undefined" && document.getElementById("gloss-table")) {
  wire();
}
