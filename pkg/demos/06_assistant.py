"""The authoring assistant, run against the scripted mock provider.

The assistant translates instructions into queries (and explains or fixes
them) through a restricted tool interface: it can search the concept
catalog, but never touches row data. Swap in an HTTP provider config to
use a real model; the flow is identical.
"""

import json

from tempoql.assistant import (
    ChatTurn,
    MockProvider,
    ToolCall,
    build_system_prompt,
    run_tool_loop,
)
from tempoql.synthetic import load_icu_dataset

ds = load_icu_dataset(n_traj=100, seed=7)

# The system prompt carries schema-level context only.
prompt = build_system_prompt(ds.spec)
print("system prompt is", len(prompt), "characters; table context excerpt:")
print("  " + prompt.split("Here is the Table Context")[1][:250].strip(), "…\n")

# A scripted provider: first it searches the catalog, then answers with a
# fenced query. A real provider plugs in behind the same interface.
provider = MockProvider([
    ChatTurn(role="assistant", content="",
             tool_calls=[ToolCall(id="c1", name="search_concepts",
                                  arguments={"query": "/resp\\w* rate/i",
                                             "scope": "chartevents"})]),
    ChatTurn(role="assistant", content=(
        "The dataset records respiratory rate under two chartevents "
        "concepts, so I search by pattern:\n"
        "```tempoql\n"
        "mean {name contains /resp\\w* rate/i; scope = chartevents} "
        "from #now - 1 hour to #now every 1 hour\n"
        "```\n"
        "This averages all respiratory-rate observations hourly."
    )),
])

outcome = run_tool_loop("generate", "extract all respiratory rate measurements "
                        "recorded every hour", provider, ds.spec, ds.catalog())

print(f"tool calls made: {outcome.tool_call_count}")
tool_reply = json.loads([t for t in outcome.transcript if t.role == "tool"][0].content)
print("concepts returned to the model:",
      [c["name"] for c in tool_reply["concepts"]])

for q in outcome.queries:
    print(f"\ncandidate query (valid={q.valid}):\n  {q.text}")

# Candidates are parse-validated before the UI offers to insert them.
from tempoql.engine import evaluate
r = evaluate(outcome.queries[0].text, ds)
print(f"\nrunning the candidate: {len(r.result)} rows")
