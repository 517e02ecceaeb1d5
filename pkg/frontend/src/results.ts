/** Results sidebar: profile panels for the final series, a drill-down
 * accordion for every subquery (in API order), paged raw rows, and
 * diagnostics. All numbers come straight from the profile bundle. */

import { escapeHtml } from "./editor.js";
import type {
  Profile,
  QueryResponse,
  ResultRow,
  SubqueryProfile,
  ValueSummary,
} from "./types.js";

export interface ResultsViewState {
  response: QueryResponse | null;
  rows: ResultRow[];
  cursor: string | null;
  openSubquery: number | null;
  pending: boolean;
}

export function initialResults(): ResultsViewState {
  return { response: null, rows: [], cursor: null, openSubquery: null, pending: false };
}

export function withResponse(state: ResultsViewState, resp: QueryResponse): ResultsViewState {
  return { ...state, response: resp, rows: resp.result.rows,
           cursor: resp.result.cursor, openSubquery: null, pending: false };
}

export function withMoreRows(state: ResultsViewState, rows: ResultRow[],
                             cursor: string | null): ResultsViewState {
  return { ...state, rows: [...state.rows, ...rows], cursor };
}

function pct(x: number): string {
  return `${(100 * x).toFixed(1)}%`;
}

export function renderHistogram(summary: ValueSummary | null): string {
  if (!summary || summary.type !== "numeric") return "";
  const counts = summary.histogram.counts;
  const peak = Math.max(...counts, 1);
  const bars = counts.map((c) => {
    const h = Math.round((100 * c) / peak);
    return `<div class="hist-bar" style="height:${h}%" title="${c}"></div>`;
  }).join("");
  return `<div class="histogram" data-bins="${counts.length}">${bars}</div>
    <div class="hist-range"><span>${fmt(summary.min)}</span><span>${fmt(summary.max)}</span></div>`;
}

function fmt(x: number): string {
  return Number.isInteger(x) ? String(x) : x.toPrecision(4);
}

function renderSummary(summary: ValueSummary | null): string {
  if (!summary) return `<p class="muted">no non-missing values</p>`;
  if (summary.type === "numeric") {
    return `${renderHistogram(summary)}
      <dl class="stats">
        <dt>median</dt><dd>${fmt(summary.median)}</dd>
        <dt>mean</dt><dd>${fmt(summary.mean)}</dd>
        <dt>IQR</dt><dd>${fmt(summary.q1)} – ${fmt(summary.q3)}</dd>
      </dl>`;
  }
  if (summary.type === "timestamp") {
    return `<dl class="stats"><dt>from</dt><dd>${escapeHtml(summary.min)}</dd>
      <dt>to</dt><dd>${escapeHtml(summary.max)}</dd></dl>`;
  }
  const rows = summary.top.map((t) =>
    `<tr><td>${escapeHtml(t.value)}</td><td>${t.count}</td></tr>`).join("");
  const other = summary.other_count
    ? `<tr><td class="muted">(${summary.distinct_count - summary.top.length} more)</td>` +
      `<td>${summary.other_count}</td></tr>` : "";
  return `<table class="top-values">${rows}${other}</table>`;
}

export function renderProfilePanel(profile: Profile): string {
  return `<div class="profile-panel">
    <dl class="stats">
      <dt>kind</dt><dd class="profile-kind">${escapeHtml(profile.kind)}</dd>
      <dt>rows</dt><dd class="profile-rows">${profile.row_count}</dd>
      <dt>trajectories</dt><dd class="profile-trajectories">${profile.trajectory_count}</dd>
      <dt>rows/trajectory</dt><dd>${profile.rows_per_trajectory.min} / ${profile.rows_per_trajectory.median} / ${profile.rows_per_trajectory.max}</dd>
    </dl>
    <div class="missingness">
      <div class="missing-bar"><div class="missing-fill" style="width:${pct(profile.missing_fraction)}"></div></div>
      <span class="missing-label">${pct(profile.missing_fraction)} missing</span>
    </div>
    ${renderSummary(profile.value_summary)}
  </div>`;
}

function renderSubquery(sub: SubqueryProfile, index: number, open: boolean): string {
  const body = open
    ? `<div class="subquery-body">
        ${renderProfilePanel(sub.profile)}
        ${sub.plan ? `<pre class="plan">${escapeHtml(sub.plan)}</pre>` : ""}
      </div>`
    : "";
  return `<div class="subquery${open ? " open" : ""}" data-index="${index}">
    <button class="subquery-toggle" data-index="${index}">
      <span class="subquery-label">${escapeHtml(sub.label)}</span>
      <span class="subquery-kind">${escapeHtml(sub.profile.kind)}, ${sub.profile.row_count} rows</span>
    </button>
    ${body}
  </div>`;
}

export function renderResults(state: ResultsViewState): string {
  if (state.pending) return `<p class="muted">running…</p>`;
  if (!state.response) return `<p class="muted">Run a query to see its profile.</p>`;
  const resp = state.response;
  const subqueries = resp.profile.subqueries
    .map((s, i) => renderSubquery(s, i, state.openSubquery === i)).join("");
  const diagnostics = resp.diagnostics.length
    ? `<ul class="diagnostics">${resp.diagnostics.map((d) => `<li>${escapeHtml(d)}</li>`).join("")}</ul>`
    : "";
  const headers = state.rows.length ? Object.keys(state.rows[0]) : [];
  const table = state.rows.length
    ? `<table class="rows-table">
        <thead><tr>${headers.map((h) => `<th>${escapeHtml(h)}</th>`).join("")}</tr></thead>
        <tbody>${state.rows.slice(0, 500).map((r) =>
          `<tr>${headers.map((h) => `<td>${escapeHtml(r[h] ?? "")}</td>`).join("")}</tr>`).join("")}</tbody>
      </table>` : "";
  const more = state.cursor
    ? `<button id="load-more">Load more (${state.rows.length} of ${resp.result.row_count})</button>`
    : `<p class="muted">${resp.result.row_count} rows total</p>`;
  return `<section class="final-profile">
      <h3>Result</h3>
      ${renderProfilePanel(resp.profile.final)}
      ${diagnostics}
    </section>
    <section class="subqueries">
      <h3>Subqueries</h3>
      ${subqueries || `<p class="muted">none</p>`}
    </section>
    <section class="raw-rows">
      <h3>Rows</h3>
      ${table}
      ${more}
    </section>`;
}

export function renderQueryError(message: string, hasSpan: boolean): string {
  const where = hasSpan ? " (underlined in the editor)" : "";
  return `<p class="banner error query-error">${escapeHtml(message)}${where}</p>`;
}
