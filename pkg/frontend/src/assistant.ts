/** Assistant chat panel. Candidate queries arrive already fenced and
 * parse-checked by the server; each gets a validity badge and an insert
 * button. Explanations without fences render as plain prose. */

import { escapeHtml } from "./editor.js";
import type { AssistantOutcome } from "./types.js";

export interface ChatItem {
  role: "user" | "assistant";
  text: string;
  outcome: AssistantOutcome | null;
}

export interface AssistantViewState {
  available: boolean;
  pending: boolean;
  chat: ChatItem[];
  error: string | null;
}

export function initialAssistant(available: boolean): AssistantViewState {
  return { available, pending: false, chat: [], error: null };
}

export function withRequest(state: AssistantViewState, text: string): AssistantViewState {
  return { ...state, pending: true, error: null,
           chat: [...state.chat, { role: "user", text, outcome: null }] };
}

export function withOutcome(state: AssistantViewState,
                            outcome: AssistantOutcome): AssistantViewState {
  return { ...state, pending: false,
           chat: [...state.chat,
                  { role: "assistant", text: outcome.prose, outcome }] };
}

export function withFailure(state: AssistantViewState, message: string): AssistantViewState {
  return { ...state, pending: false, error: message };
}

export function candidateAt(state: AssistantViewState, item: number,
                            index: number): string | null {
  const outcome = state.chat[item]?.outcome;
  return outcome?.queries[index]?.text ?? null;
}

function renderCandidates(outcome: AssistantOutcome, item: number): string {
  return outcome.queries.map((q, i) => {
    const badge = q.valid
      ? `<span class="badge valid">valid</span>`
      : `<span class="badge invalid" title="${escapeHtml(q.error ?? "")}">invalid</span>`;
    return `<div class="candidate">
      <pre class="candidate-text">${escapeHtml(q.text)}</pre>
      ${badge}
      <button class="candidate-insert" data-item="${item}" data-index="${i}">Insert into editor</button>
    </div>`;
  }).join("");
}

export function renderAssistant(state: AssistantViewState): string {
  if (!state.available) {
    return `<p class="muted disabled-state">No assistant provider is configured for
      this service; start it with --provider-config to enable this panel.</p>`;
  }
  const chat = state.chat.map((item, idx) => {
    if (item.role === "user") {
      return `<div class="chat user"><p>${escapeHtml(item.text)}</p></div>`;
    }
    const prose = item.text
      ? `<p class="prose">${escapeHtml(stripFences(item.text))}</p>` : "";
    const candidates = item.outcome ? renderCandidates(item.outcome, idx) : "";
    return `<div class="chat assistant">${prose}${candidates}</div>`;
  }).join("");
  const pending = state.pending ? `<p class="muted">thinking…</p>` : "";
  const error = state.error
    ? `<p class="banner error">${escapeHtml(state.error)}</p>` : "";
  return `<div class="chat-log">${chat}${pending}${error}</div>`;
}

/** Prose rendering drops fenced blocks (they render as candidates). */
export function stripFences(text: string): string {
  const lines = text.split("\n");
  const out: string[] = [];
  let inFence = false;
  for (const line of lines) {
    if (line.trim().startsWith("```")) {
      inFence = !inFence;
      continue;
    }
    if (!inFence) out.push(line);
  }
  return out.join("\n").trim();
}
