"""Datasets and the concept catalog.

A dataset specification maps source tables onto three element kinds:
attributes (one value per trajectory), events (timestamped points), and
intervals (timestamped spans). Ingestion joins vocabulary tables so
concepts are addressable by human-readable name, and compiles a catalog of
everything queryable.
"""

from tempoql.dataset import search_concepts
from tempoql.synthetic import load_icu_dataset

ds = load_icu_dataset(n_traj=100, seed=7)

print(f"{len(ds.index)} trajectories across {len(ds.tables)} tables\n")

print("Ingestion report (rows read/dropped per table):")
for entry in ds.report:
    print(f"  {entry.table}: {entry.rows_read} read, {entry.rows_dropped} dropped",
          entry.reasons or "")

catalog = ds.catalog()
print(f"\nCatalog: {len(catalog)} entries. A few from each scope:")
seen = set()
for e in catalog:
    if e.scope not in seen:
        seen.add(e.scope)
        print(f"  [{e.scope}] {e.name} ({e.element_kind}, {e.occurrence_count} occurrences)")

# Search supports substrings and /regex/flags, ranked by occurrence count.
print("\nSearch 'resp':")
for e in search_concepts(catalog, "resp").entries[:5]:
    print(f"  {e.name} ({e.occurrence_count})")

print("\nSearch /resp\\w* rate/i (regex):")
for e in search_concepts(catalog, "/resp\\w* rate/i").entries:
    print(f"  {e.name}")

# Element queries resolve through the same machinery, and every resolution
# carries a retrieval plan you can inspect.
from tempoql.engine import evaluate

r = evaluate('{name in ("Respiratory Rate", "Resp Rate"); scope = chartevents}', ds)
print(f"\nResolved {len(r.result)} respiratory-rate events; plan:")
print(r.subqueries[0].plan.render())
