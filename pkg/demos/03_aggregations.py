"""Temporal aggregation: functions, bounds, timesteps, interval modes.

An aggregation has up to four parts: the function, the series being
aggregated, the window bounds collected at each timestep (usually phrased
around #now), and the timestep definition. Without a timestep it collapses
to one value per trajectory.
"""

from tempoql.engine import evaluate
from tempoql.synthetic import load_icu_dataset

ds = load_icu_dataset(n_traj=100, seed=7)


def show(title, query, n=4):
    r = evaluate(query, ds)
    rows = r.result.rows()
    print(f"\n{title}\n  {query}")
    for row in rows[:n]:
        print("   ", row)
    print(f"    … {len(rows)} rows, kind {type(r.result).__name__}")
    return r


# Whole-trajectory: one value per stay.
show("Per-stay minimum blood pressure:",
     "min {Non Invasive Blood Pressure mean; scope = chartevents} "
     "from #mintime to #maxtime")

# Regular timesteps with a rolling window.
show("Hourly rolling mean heart rate:",
     "mean {Heart Rate; scope = chartevents} from #now - 8 hours to #now "
     "every 1 hour from {Admit Time} to {Discharge Time}")

# Event-anchored timesteps: a row at every anchor occurrence.
show("Prior ventilation at each ventilation start:",
     "exists {Invasive Ventilation; scope = procedureevents} before #now "
     "at every start({Invasive Ventilation; scope = procedureevents})")

# Interval modes: how a spanning row contributes to a window.
show("Overlap time with ventilation per day (duration mode):",
     "sum duration {Invasive Ventilation; scope = procedureevents} "
     "from #now - 1 day to #now every 1 day")

# Counting distinct values.
show("Distinct oxygen devices seen per day:",
     "count distinct nonnull {O2 Delivery Device(s); scope = chartevents} "
     "from #now - 1 day to #now every 1 day from {Admit Time} to {Discharge Time}")

# Nested aggregation: each temperature versus its own trailing average.
show("Rolling difference:",
     "temp - (mean temp from #now - 8 h to #now at every temp) "
     "with temp as {Temperature Fahrenheit; scope = chartevents}")
