/** Run-history panel: clicking an entry restores its text into the editor
 * without running it. */

import { escapeHtml } from "./editor.js";
import type { HistoryEntry } from "./types.js";

export function renderHistory(entries: HistoryEntry[]): string {
  if (!entries.length) return `<p class="muted">no runs yet</p>`;
  const items = [...entries].reverse().slice(0, 50).map((h, i) => {
    const mark = h.ok ? "✓" : "✗";
    return `<li>
      <button class="history-restore" data-query="${escapeHtml(h.query)}">
        <span class="history-ok ${h.ok ? "ok" : "failed"}">${mark}</span>
        <code>${escapeHtml(truncate(h.query, 70))}</code>
        <time>${escapeHtml(h.ran_at)}</time>
      </button>
    </li>`;
  }).join("");
  return `<ul class="history-list">${items}</ul>`;
}

function truncate(s: string, n: number): string {
  return s.length > n ? s.slice(0, n - 1) + "…" : s;
}
