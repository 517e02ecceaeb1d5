"""A tour of the query language surface.

Element queries in braces, arithmetic with broadcasting, case expressions,
pattern matching, with-bindings, and the editor-support utilities
(canonical printing, completion, error spans).
"""

from tempoql import complete, parse, unparse
from tempoql.errors import ParseError
from tempoql.engine import evaluate
from tempoql.synthetic import load_icu_dataset

ds = load_icu_dataset(n_traj=100, seed=7)

# Attributes broadcast across arithmetic: age at admission from the anchor
# year and anchor age.
age = evaluate("({Admit Time} - {Anchor Year}) as years + {Anchor Age}", ds)
print("ages:", [round(v.payload, 1) for _, v in age.result.rows()[:5]], "…")

# Unit conversion, comparisons, case expressions: clean Fahrenheit entries
# that were recorded on a Celsius concept.
cleaned = evaluate(
    "(case when t > 45 then (t - 32) * 5 / 9 else t end"
    " where #value between 20 and 50)"
    " with t as {Temperature Celsius; scope = chartevents}", ds)
print(f"cleaned temperatures: {len(cleaned.result)} rows")

# Pattern matching over text values.
af = evaluate("{Heart Rhythm} contains /fibrillation/i", ds)
n_true = sum(1 for *_, v in af.result.rows() if not v.is_missing() and v.payload)
print(f"rhythm observations flagged as fibrillation: {n_true}")

# The pretty-printer produces one canonical rendering; parsing it back
# yields the same structure (this is what the query store persists).
q = "temp-(mean temp from #now-8 h to #now at every temp) with temp as {Temperature Fahrenheit; scope = chartevents}"
print("\ncanonical form:\n ", unparse(parse(q)))

# Parse errors carry a span and the token set that would have been valid.
try:
    parse("min x from to")
except ParseError as exc:
    print(f"\nparse error at {exc.span}: expected one of {exc.expected[:6]} …")

# Completion uses the same expected-token machinery, plus the catalog
# inside braces.
print("completions for 'mean x fr|':", complete("mean x fr", 9))
print("completions for '{Respir|':", complete("{Respir", 7, ds.catalog()))
