/** Editor state and rendering.
 *
 * The editor is a textarea over a highlight layer. Highlighting and the
 * error underline are presentation only: token classes come from the
 * keyword vocabulary served by /api/meta, and error spans come verbatim
 * from 422 responses. No grammar lives here.
 */

import type { MetaResponse, Span } from "./types.js";

export interface EditorState {
  text: string;
  cursor: number;
  status: "ok" | "error" | "unknown";
  errorSpan: Span | null;
  errorMessage: string | null;
  dirty: boolean;
  activeStoreName: string | null;
}

export function initialEditor(text = ""): EditorState {
  return { text, cursor: text.length, status: "unknown", errorSpan: null,
           errorMessage: null, dirty: false, activeStoreName: null };
}

export function withText(state: EditorState, text: string, cursor?: number): EditorState {
  return { ...state, text, cursor: cursor ?? text.length, dirty: true,
           status: "unknown", errorSpan: null, errorMessage: null };
}

export function withParseOk(state: EditorState): EditorState {
  return { ...state, status: "ok", errorSpan: null, errorMessage: null };
}

export function withParseError(state: EditorState, message: string,
                               span: Span | null): EditorState {
  const clamped = span
    ? { start: Math.max(0, Math.min(span.start, state.text.length)),
        end: Math.max(0, Math.min(span.end, state.text.length)) }
    : null;
  return { ...state, status: "error", errorSpan: clamped, errorMessage: message };
}

/** Insert `snippet` replacing [from, to); returns the new state with the
 * cursor after the insertion. */
export function insertText(state: EditorState, snippet: string,
                           from?: number, to?: number): EditorState {
  const a = from ?? state.cursor;
  const b = to ?? a;
  const text = state.text.slice(0, a) + snippet + state.text.slice(b);
  return withText(state, text, a + snippet.length);
}

export interface Vocabulary {
  keywords: Set<string>;
  functions: Set<string>;
  units: Set<string>;
}

export function vocabularyFromMeta(meta: MetaResponse): Vocabulary {
  const lang = meta.language;
  return {
    keywords: new Set(lang.keywords.map((k) => k.toLowerCase())),
    functions: new Set([...lang.aggregation_functions, ...lang.builtin_functions]
      .flatMap((f) => f.split(" "))),
    units: new Set(lang.units.flatMap((u) => [u, u.replace(/s$/, "")])),
  };
}

const TOKEN_RE =
  /(\{[^}]*\}?)|("(?:\\.|[^"])*"|'(?:\\.|[^'])*')|(#[a-z]+)|(\/(?:\\.|[^\/\n])+\/[A-Za-z]*)|([A-Za-z_][A-Za-z0-9_]*)|(\d+(?:\.\d+)?)|(\S)|(\s+)/g;

export function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Highlight layer HTML for the current text, with the error span (if the
 * state is in error) wrapped in a `.tq-error` underline. The invariant
 * "error span highlighted iff status is error" lives here. */
export function renderHighlight(state: EditorState, vocab: Vocabulary): string {
  const marked = state.status === "error" && state.errorSpan ? state.errorSpan : null;
  const pieces: string[] = [];
  let idx = 0;

  const emit = (text: string, cls: string | null) => {
    // split the token across the error-span boundary so underlines align
    const start = idx;
    const end = idx + text.length;
    const segments: Array<[number, number, boolean]> = [];
    if (marked && start < marked.end && end > marked.start) {
      const a = Math.max(start, marked.start);
      const b = Math.min(end, marked.end);
      if (start < a) segments.push([start, a, false]);
      segments.push([a, b, true]);
      if (b < end) segments.push([b, end, false]);
    } else {
      segments.push([start, end, false]);
    }
    for (const [a, b, isErr] of segments) {
      const chunk = escapeHtml(state.text.slice(a, b));
      const classes = [cls, isErr ? "tq-error" : null].filter(Boolean);
      pieces.push(classes.length
        ? `<span class="${classes.join(" ")}">${chunk}</span>`
        : chunk);
    }
    idx = end;
  };

  for (const m of state.text.matchAll(TOKEN_RE)) {
    const [tok, element, str, marker, regex, word, num] = m;
    if (element) emit(tok, "tq-element");
    else if (str) emit(tok, "tq-string");
    else if (marker) emit(tok, "tq-marker");
    else if (regex) emit(tok, "tq-regex");
    else if (word) {
      const low = word.toLowerCase();
      if (vocab.functions.has(low)) emit(tok, "tq-function");
      else if (vocab.keywords.has(low) || vocab.units.has(low)) emit(tok, "tq-keyword");
      else emit(tok, null);
    } else if (num) emit(tok, "tq-number");
    else emit(tok, null);
  }
  if (idx < state.text.length) emit(state.text.slice(idx), null);
  return pieces.join("");
}

/** Line/column (1-based) of a character offset, for the status bar. */
export function lineColumn(text: string, offset: number): { line: number; column: number } {
  const upTo = text.slice(0, Math.max(0, Math.min(offset, text.length)));
  const lines = upTo.split("\n");
  return { line: lines.length, column: lines[lines.length - 1].length + 1 };
}
