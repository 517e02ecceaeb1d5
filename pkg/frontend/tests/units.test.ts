import { describe, expect, it } from "vitest";

import { copyAsQuery, initialCatalog, rowKey, toggleSelection, withResults,
         selectedEntries } from "../src/catalog.js";
import { initialEditor, insertText, lineColumn, renderHighlight,
         withParseError, withParseOk, withText } from "../src/editor.js";
import { stripFences, initialAssistant, withOutcome, withRequest,
         candidateAt } from "../src/assistant.js";
import { renderProfilePanel, renderHistogram } from "../src/results.js";
import type { CatalogEntry, Profile } from "../src/types.js";

const vocab = {
  keywords: new Set(["from", "to", "every", "where", "with", "as"]),
  functions: new Set(["mean", "count", "exists"]),
  units: new Set(["hours", "hour", "days", "day"]),
};

function entry(name: string, scope: string, count = 1): CatalogEntry {
  return { name, scope, id: null, kind: "event", count };
}

describe("copy-as-query emission", () => {
  it("single selection becomes a shorthand element query", () => {
    expect(copyAsQuery([entry("Heart Rate", "chartevents")]))
      .toBe("{Heart Rate; scope = chartevents}");
  });

  it("multiple same-scope rows fold into name in (...)", () => {
    expect(copyAsQuery([entry("A", "S"), entry("B", "S")]))
      .toBe('{name in ("A", "B"); scope = S}');
  });

  it("cross-scope selections are refused", () => {
    expect(copyAsQuery([entry("A", "S1"), entry("B", "S2")])).toBeNull();
  });

  it("selection survives result refresh, dropping vanished rows", () => {
    let state = withResults(initialCatalog(),
      { entries: [entry("A", "S"), entry("B", "S")], truncated: false });
    state = toggleSelection(state, rowKey(entry("A", "S")));
    state = toggleSelection(state, rowKey(entry("B", "S")));
    state = withResults(state, { entries: [entry("B", "S")], truncated: false });
    expect(selectedEntries(state).map((e) => e.name)).toEqual(["B"]);
  });
});

describe("editor state", () => {
  it("error spans render as underlines only in error status", () => {
    let state = withText(initialEditor(), "min x from to");
    expect(renderHighlight(state, vocab)).not.toContain("tq-error");
    state = withParseError(state, "expected an expression", { start: 11, end: 13 });
    const html = renderHighlight(state, vocab);
    expect(html).toContain('class="tq-keyword tq-error"'); // "to" is a keyword
    state = withParseOk(state);
    expect(renderHighlight(state, vocab)).not.toContain("tq-error");
  });

  it("spans are clamped to the text", () => {
    const state = withParseError(withText(initialEditor(), "ab"), "boom",
      { start: 1, end: 99 });
    expect(state.errorSpan).toEqual({ start: 1, end: 2 });
  });

  it("highlight classifies tokens from the served vocabulary", () => {
    const state = withText(initialEditor(),
      'mean {Heart Rate} from #now - 8 hours to #now every 1 day');
    const html = renderHighlight(state, vocab);
    expect(html).toContain('<span class="tq-function">mean</span>');
    expect(html).toContain('<span class="tq-element">{Heart Rate}</span>');
    expect(html).toContain('<span class="tq-marker">#now</span>');
    expect(html).toContain('<span class="tq-keyword">every</span>');
  });

  it("highlight escapes markup in query text", () => {
    const state = withText(initialEditor(), "x < '<script>'");
    const html = renderHighlight(state, vocab);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("insertText replaces a range and moves the cursor", () => {
    const state = insertText(withText(initialEditor(), "count  here"), "{X}", 6, 6);
    expect(state.text).toBe("count {X} here");
    expect(state.cursor).toBe(9);
    expect(state.dirty).toBe(true);
  });

  it("lineColumn is 1-based across newlines", () => {
    expect(lineColumn("ab\ncd", 4)).toEqual({ line: 2, column: 2 });
  });
});

describe("assistant view", () => {
  const outcome = {
    queries: [
      { text: "{Gender}", valid: true, error: null },
      { text: "min x from to", valid: false, error: "expected an expression" },
    ],
    prose: "Some context\n```tempoql\n{Gender}\n```\ntrailing notes",
    transcript: [], tool_call_count: 1, diagnostics: [],
  };

  it("keeps fenced blocks out of the prose", () => {
    expect(stripFences(outcome.prose)).toBe("Some context\ntrailing notes");
  });

  it("exposes candidates for insertion with validity intact", () => {
    let state = withRequest(initialAssistant(true), "make me a query");
    state = withOutcome(state, outcome);
    expect(candidateAt(state, 1, 0)).toBe("{Gender}");
    expect(candidateAt(state, 1, 1)).toBe("min x from to");
    expect(candidateAt(state, 1, 9)).toBeNull();
  });
});

describe("profile rendering", () => {
  const profile: Profile = {
    kind: "timeseries", row_count: 120, trajectory_count: 30,
    rows_per_trajectory: { min: 1, median: 4, max: 9 },
    missing_fraction: 0.25,
    value_summary: {
      type: "numeric", min: 0, q1: 1, median: 2, q3: 3, max: 4, mean: 2,
      histogram: { counts: [5, 0, 10], edges: [0, 1, 2, 3] },
    },
  };

  it("shows counts by trajectory and within, and missingness", () => {
    const html = renderProfilePanel(profile);
    expect(html).toContain('class="profile-rows">120');
    expect(html).toContain('class="profile-trajectories">30');
    expect(html).toContain("25.0% missing");
    expect(html).toContain("1 / 4 / 9");
  });

  it("histogram bars scale to the peak bin", () => {
    const html = renderHistogram(profile.value_summary);
    expect(html).toContain('data-bins="3"');
    expect(html).toContain("height:50%");
    expect(html).toContain("height:100%");
  });
});
