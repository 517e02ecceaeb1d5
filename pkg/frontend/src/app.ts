/** Browser bootstrap: wires the panels to the API.
 *
 * All semantics come from the service; this file only moves state between
 * fetches and the render functions. One query runs at a time (the run
 * button disables while pending); catalog searches abort superseded
 * requests; Ctrl+Enter runs from the editor so the whole
 * search → copy → edit → run → inspect loop works from the keyboard.
 */

import { ApiClient, QueryFailed } from "./api.js";
import {
  copyAsQuery,
  initialCatalog,
  renderCatalog,
  selectedEntries,
  toggleSelection,
  withResults,
  CatalogViewState,
} from "./catalog.js";
import {
  EditorState,
  initialEditor,
  insertText,
  lineColumn,
  renderHighlight,
  vocabularyFromMeta,
  Vocabulary,
  withParseError,
  withParseOk,
  withText,
} from "./editor.js";
import { renderHistory } from "./history.js";
import {
  initialAssistant,
  renderAssistant,
  withFailure,
  withOutcome,
  withRequest,
  AssistantViewState,
  candidateAt,
} from "./assistant.js";
import {
  initialResults,
  renderQueryError,
  renderResults,
  withMoreRows,
  withResponse,
  ResultsViewState,
} from "./results.js";

const api = new ApiClient("");

let editor: EditorState = initialEditor();
let catalog: CatalogViewState = initialCatalog();
let results: ResultsViewState = initialResults();
let assistant: AssistantViewState = initialAssistant(false);
let vocab: Vocabulary = { keywords: new Set(), functions: new Set(), units: new Set() };
let lastQueryError: string | null = null;

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

function textarea(): HTMLTextAreaElement {
  return $("editor-input") as unknown as HTMLTextAreaElement;
}

function paint() {
  $("editor-highlight").innerHTML =
    renderHighlight(editor, vocab) + "\n";
  const pos = lineColumn(editor.text, editor.cursor);
  const status = editor.status === "error"
    ? `parse error: ${editor.errorMessage ?? ""}`
    : editor.status === "ok" ? "ok" : "";
  $("editor-status").textContent =
    `${pos.line}:${pos.column}${status ? " — " + status : ""}`;
  $("catalog-panel").innerHTML = renderCatalog(catalog);
  $("results-panel").innerHTML =
    (lastQueryError ? renderQueryError(lastQueryError, editor.errorSpan !== null) : "")
    + renderResults(results);
  $("assistant-panel").innerHTML = renderAssistant(assistant);
  ($("run-button") as unknown as HTMLButtonElement).disabled = results.pending;
  bindDynamic();
}

function syncFromTextarea() {
  const ta = textarea();
  editor = withText(editor, ta.value, ta.selectionStart ?? ta.value.length);
  lastQueryError = null;
}

async function runQuery() {
  if (results.pending || !editor.text.trim()) return;
  results = { ...results, pending: true };
  lastQueryError = null;
  paint();
  try {
    const resp = await api.runQuery(editor.text);
    editor = withParseOk(editor);
    results = withResponse(results, resp);
  } catch (err) {
    results = { ...results, pending: false };
    if (err instanceof QueryFailed && err.status === 422) {
      editor = withParseError(editor, err.detail.error, err.detail.span ?? null);
      lastQueryError = err.detail.error;
    } else {
      lastQueryError = err instanceof Error ? err.message : String(err);
    }
  }
  paint();
  refreshHistory();
}

let searchAbort: AbortController | null = null;

async function searchCatalog() {
  searchAbort?.abort();
  searchAbort = new AbortController();
  const text = (($("catalog-search") as unknown) as HTMLInputElement).value;
  const scope = (($("catalog-scope") as unknown) as HTMLSelectElement).value;
  catalog = { ...catalog, searchText: text, scopeFilter: scope };
  try {
    const resp = await api.searchCatalog(text, scope, searchAbort.signal);
    catalog = withResults(catalog, resp);
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    catalog = { ...catalog, error: "catalog search failed; is the service up?" };
  }
  paint();
}

async function refreshHistory() {
  try {
    const { history } = await api.history();
    $("history-panel").innerHTML = renderHistory(history);
  } catch {
    /* history is best-effort */
  }
}

async function assistantFlow(kind: "generate" | "explain" | "fix") {
  if (!assistant.available || assistant.pending) return;
  let payload: Record<string, string>;
  let label: string;
  if (kind === "generate") {
    const box = $("assistant-input") as unknown as HTMLInputElement;
    if (!box.value.trim()) return;
    payload = { instruction: box.value };
    label = box.value;
    box.value = "";
  } else if (kind === "explain") {
    payload = { query: editor.text };
    label = `explain: ${editor.text}`;
  } else {
    payload = { query: editor.text, error: lastQueryError ?? editor.errorMessage ?? "" };
    label = `fix: ${editor.text}`;
  }
  assistant = withRequest(assistant, label);
  paint();
  try {
    assistant = withOutcome(assistant, await api.assistant(kind, payload));
  } catch (err) {
    assistant = withFailure(assistant,
      err instanceof QueryFailed && err.status === 503
        ? "assistant unavailable: no provider configured"
        : `assistant request failed: ${(err as Error).message}`);
  }
  paint();
}

function bindDynamic() {
  document.querySelectorAll<HTMLInputElement>(".cat-pick").forEach((box) => {
    box.onchange = () => {
      catalog = toggleSelection(catalog, box.dataset.key ?? "");
      paint();
    };
  });
  const copyBtn = document.getElementById("catalog-copy") as HTMLButtonElement | null;
  if (copyBtn) {
    copyBtn.onclick = () => {
      const snippet = copyAsQuery(selectedEntries(catalog));
      if (snippet) {
        editor = insertText(editor, snippet);
        textarea().value = editor.text;
        paint();
        textarea().focus();
      }
    };
  }
  document.querySelectorAll<HTMLButtonElement>(".subquery-toggle").forEach((btn) => {
    btn.onclick = () => {
      const i = Number(btn.dataset.index);
      results = { ...results, openSubquery: results.openSubquery === i ? null : i };
      paint();
    };
  });
  const more = document.getElementById("load-more") as HTMLButtonElement | null;
  if (more) {
    more.onclick = async () => {
      if (!results.cursor) return;
      const page = await api.moreRows(results.cursor);
      results = withMoreRows(results, page.rows, page.cursor);
      paint();
    };
  }
  document.querySelectorAll<HTMLButtonElement>(".candidate-insert").forEach((btn) => {
    btn.onclick = () => {
      const text = candidateAt(assistant, Number(btn.dataset.item),
                               Number(btn.dataset.index));
      if (text !== null) {
        editor = withText(editor, text);
        textarea().value = text;
        paint();
        textarea().focus();
      }
    };
  });
  document.querySelectorAll<HTMLButtonElement>(".history-restore").forEach((btn) => {
    btn.onclick = () => {
      const q = btn.dataset.query ?? "";
      editor = withText(editor, q);
      textarea().value = q;
      paint();
    };
  });
  const retry = document.getElementById("catalog-retry") as HTMLButtonElement | null;
  if (retry) retry.onclick = () => void searchCatalog();
}

async function boot() {
  try {
    const meta = await api.meta();
    vocab = vocabularyFromMeta(meta);
    assistant = initialAssistant(meta.assistant_available);
    const scopeSel = $("catalog-scope") as unknown as HTMLSelectElement;
    scopeSel.innerHTML = `<option value="">all scopes</option>` +
      meta.scopes.map((s) => `<option>${s}</option>`).join("");
    document.title = `workbench — ${meta.trajectory_count} trajectories`;
  } catch {
    lastQueryError = "could not reach the service API";
  }

  const ta = textarea();
  ta.addEventListener("input", () => { syncFromTextarea(); paint(); });
  ta.addEventListener("keydown", (ev) => {
    if ((ev.ctrlKey || ev.metaKey) && ev.key === "Enter") {
      ev.preventDefault();
      syncFromTextarea();
      void runQuery();
    }
  });
  ta.addEventListener("scroll", () => {
    const hl = $("editor-highlight");
    hl.scrollTop = ta.scrollTop;
    hl.scrollLeft = ta.scrollLeft;
  });
  $("run-button").addEventListener("click", () => { syncFromTextarea(); void runQuery(); });
  let debounce: ReturnType<typeof setTimeout> | null = null;
  $("catalog-search").addEventListener("input", () => {
    if (debounce) clearTimeout(debounce);
    debounce = setTimeout(() => void searchCatalog(), 200);
  });
  $("catalog-scope").addEventListener("change", () => void searchCatalog());
  $("assistant-send").addEventListener("click", () => void assistantFlow("generate"));
  ($("assistant-input") as unknown as HTMLInputElement).addEventListener("keydown",
    (ev) => { if (ev.key === "Enter") void assistantFlow("generate"); });
  $("assistant-explain").addEventListener("click", () => void assistantFlow("explain"));
  $("assistant-fix").addEventListener("click", () => void assistantFlow("fix"));

  await searchCatalog();
  await refreshHistory();
  paint();
}

if (typeof document !== "undefined" && document.getElementById("editor-input")) {
  void boot();
}
