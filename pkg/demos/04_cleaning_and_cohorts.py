"""Data cleaning clauses and a cohort-exploration walkthrough.

where filters rows, impute fills gaps (population statistic, constant, or
broadcast expression), carry forward-fills within a horizon, and cut
discretizes. The second half walks a drug-safety question end to end on
the drug/outcome dataset: find people whose first exposure was followed by
the outcome within 90 days, excluding anyone with prior history.
"""

from tempoql.engine import evaluate
from tempoql.synthetic import load_drug_dataset, load_icu_dataset

ds = load_icu_dataset(n_traj=100, seed=7)

# Clean, fill, and discretize a lab series in one pipeline.
query = (
    "mean {Platelet Count; scope = Lab} from #now - 1 day to #now "
    "carry 2 days impute mean "
    "every 1 day from {Admit Time} to {Discharge Time}"
)
r = evaluate(query, ds)
print("daily platelets (carried, then imputed):", r.result.rows()[:3], "…")

binned = evaluate(
    "({Platelet Count; scope = Lab}) "
    "cut bins [-inf, 130, 400, inf] named ['Low', 'Normal', 'High']", ds)
counts = {}
for *_, v in binned.result.rows():
    key = "missing" if v.is_missing() else v.payload
    counts[key] = counts.get(key, 0) + 1
print("platelet bins:", counts)

# --- cohort exploration on the drug/outcome dataset --------------------------

drug = load_drug_dataset()
store = {
    "semaglutide_rx": "{name contains /semaglutide/i; scope = Drug}",
    "aki_outcome": "{name contains /acute kidney injury/i; scope = SNOMED}",
}

# First pass: any outcome after an exposure, however loose.
broad = evaluate("exists aki_outcome after semaglutide_rx", drug, store)
n_broad = sum(1 for _, v in broad.result.rows()
              if not v.is_missing() and v.payload)
print(f"\nbroad cohort (outcome any time after exposure): {n_broad} matches")

# Refined: within 90 days of the first exposure, no prior history.
refined = evaluate(
    "(exists aki_outcome from first_rx to first_rx + 90 days) "
    "where (not exists aki_outcome before first_rx) "
    "with first_rx as (first starttime(semaglutide_rx) from #mintime to #maxtime)",
    drug, store)
hits = [tid for tid, v in refined.result.rows()
        if not v.is_missing() and v.payload]
print(f"refined cohort: {len(hits)} matches -> {hits}")

print("\nintermediate results captured for the sidebar:")
for sub in refined.subqueries:
    print(f"  {sub.label}")
