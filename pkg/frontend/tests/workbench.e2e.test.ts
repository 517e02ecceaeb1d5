/** Contract tests against the running service (spawned in global setup):
 * the full authoring loop using the same state transitions and render
 * functions the browser wires to the DOM. */

import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient, QueryFailed } from "../src/api.js";
import { copyAsQuery, initialCatalog, withResults, selectedEntries,
         toggleSelection, rowKey } from "../src/catalog.js";
import { initialEditor, renderHighlight, vocabularyFromMeta, withParseError,
         withText, Vocabulary } from "../src/editor.js";
import { initialAssistant, withOutcome, withRequest, candidateAt } from "../src/assistant.js";
import { initialResults, renderResults, withResponse } from "../src/results.js";
import { BASE } from "./setup/service.js";

const api = new ApiClient(BASE);
let vocab: Vocabulary;

beforeAll(async () => {
  vocab = vocabularyFromMeta(await api.meta());
});

describe("workbench against the live service", () => {
  it("catalog search returns fixture rows and feeds copy-as-query", async () => {
    const resp = await api.searchCatalog("resp", "chartevents");
    let view = withResults(initialCatalog(), resp);
    const names = view.rows.map((e) => e.name);
    expect(names).toContain("Respiratory Rate");
    expect(names).toContain("Resp Rate");

    const rr = view.rows.find((e) => e.name === "Respiratory Rate")!;
    const rr2 = view.rows.find((e) => e.name === "Resp Rate")!;
    view = toggleSelection(view, rowKey(rr));
    view = toggleSelection(view, rowKey(rr2));
    const snippet = copyAsQuery(selectedEntries(view))!;
    expect(snippet).toBe(
      '{name in ("Respiratory Rate", "Resp Rate"); scope = chartevents}');

    // the emitted query is accepted by the engine
    const run = await api.runQuery(snippet);
    expect(run.result.row_count).toBeGreaterThan(0);
  });

  it("running a valid query renders panels matching the API response", async () => {
    const resp = await api.runQuery("{Gender}");
    const view = withResponse(initialResults(), resp);
    const html = renderResults(view);
    expect(html).toContain(
      `class="profile-trajectories">${resp.profile.final.trajectory_count}<`);
    expect(html).toContain(`class="profile-rows">${resp.profile.final.row_count}<`);
    // subquery accordion lists entries in API order
    for (const sub of resp.profile.subqueries) {
      expect(html).toContain(sub.label.slice(0, 20));
    }
    const order = resp.profile.subqueries.map((s) =>
      html.indexOf(`data-index="${resp.profile.subqueries.indexOf(s)}"`));
    expect([...order].sort((a, b) => a - b)).toEqual(order);
  });

  it("a 422 renders an inline span underline in the editor", async () => {
    const text = "min x from to";
    let editor = withText(initialEditor(), text);
    let failure: QueryFailed | null = null;
    try {
      await api.runQuery(text);
    } catch (err) {
      failure = err as QueryFailed;
    }
    expect(failure?.status).toBe(422);
    expect(failure?.detail.span).toEqual({ start: 11, end: 13 });
    editor = withParseError(editor, failure!.detail.error,
                            failure!.detail.span ?? null);
    const html = renderHighlight(editor, vocab);
    const underlined = /<span class="[^"]*tq-error[^"]*">to<\/span>/.test(html);
    expect(underlined).toBe(true);
  });

  it("assistant insert places a parse-valid query into the editor", async () => {
    const outcome = await api.assistant("generate",
      { instruction: "extract all respiratory rate measurements" });
    expect(outcome.tool_call_count).toBe(1);
    expect(outcome.queries).toHaveLength(1);
    expect(outcome.queries[0].valid).toBe(true);

    let chat = withRequest(initialAssistant(true), "respiratory rate");
    chat = withOutcome(chat, outcome);
    const candidate = candidateAt(chat, 1, 0)!;
    const editor = withText(initialEditor(), candidate);
    expect(editor.text).toBe("{Respiratory Rate; scope = chartevents}");

    // "parse-valid" is the server's call: the inserted text runs cleanly
    const run = await api.runQuery(editor.text);
    expect(run.result.kind).toBe("events");
    expect(run.result.row_count).toBeGreaterThan(0);
  });

  it("paging cursors walk the full result set", async () => {
    const q = "mean {Heart Rate; scope = chartevents} from #now - 4 hours to #now "
      + "every 4 hours";
    const resp = await api.runQuery(q);
    let view = withResponse(initialResults(), resp);
    while (view.cursor) {
      const page = await api.moreRows(view.cursor);
      view = { ...view, rows: [...view.rows, ...page.rows], cursor: page.cursor };
    }
    expect(view.rows.length).toBe(resp.result.row_count);
  });

  it("history records runs and restores without executing", async () => {
    await api.runQuery("{Gender}");
    const { history } = await api.history();
    const last = history[history.length - 1];
    expect(last.query).toBe("{Gender}");
    expect(last.ok).toBe(true);
    // restoring is a pure editor-state operation
    const editor = withText(initialEditor(), last.query);
    expect(editor.text).toBe("{Gender}");
    expect(editor.status).toBe("unknown");
  });
});
