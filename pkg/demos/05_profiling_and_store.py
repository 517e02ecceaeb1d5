"""Result profiling and the query store.

Every evaluation captures its subquery results; profiles summarize any
series (counts, missingness, distributions). The store persists named
queries — referenceable from other queries — plus a run history, in a JSON
file that diffs cleanly under version control.
"""

import json
import tempfile
from pathlib import Path

from tempoql import store as store_mod
from tempoql.engine import evaluate
from tempoql.profiling import profile_result
from tempoql.synthetic import load_icu_dataset

ds = load_icu_dataset(n_traj=100, seed=7)

r = evaluate(
    "mean {Temperature Fahrenheit; scope = chartevents} "
    "from #now - 4 h to #now impute mean "
    "every 4 h from {Admit Time} to {Discharge Time}", ds)
bundle = profile_result(r)

final = bundle.final
print(f"final series: {final.kind}, {final.row_count} rows over "
      f"{final.trajectory_count} trajectories, "
      f"{final.missing_fraction:.1%} missing")
summary = final.value_summary
print(f"  value range [{summary['min']:.1f}, {summary['max']:.1f}], "
      f"median {summary['median']:.1f}")
print(f"  histogram counts: {summary['histogram']['counts']}")

print("\nsubquery profiles:")
for sub in bundle.subqueries:
    p = sub["profile"]
    print(f"  {sub['label'][:60]}: {p.kind}, {p.row_count} rows, "
          f"{p.missing_fraction:.1%} missing")

# --- the store ---------------------------------------------------------------

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "queries.json"
    store = store_mod.QueryStore()
    store_mod.upsert(store, "lactic", "{Lactate; scope = Lab}",
                     "all lactate measurements")
    store_mod.upsert(store, "lactic_daily",
                     "mean lactic from #now - 1 day to #now every 1 day",
                     "daily mean, built on the stored 'lactic'")
    store_mod.record_history(store, "{Gender}", True)
    store_mod.save(store, path)

    print("\nstore file:")
    print(json.dumps(json.loads(path.read_text()), indent=2)[:400], "…")

    # stored names resolve during evaluation, composing like bindings
    loaded = store_mod.load(path)
    daily = evaluate("lactic_daily", ds, loaded.bindings())
    print(f"\nevaluating the stored pipeline: {len(daily.result)} rows")
