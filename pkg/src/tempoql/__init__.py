"""TempoQL: readable temporal queries over trajectory-grouped event data.

The package splits into layers:

* ``tempoql.values`` / ``tempoql.series`` — the value system and the four
  trajectory-grouped series types with broadcasting.
* ``tempoql.lang`` — lexer, parser, pretty-printer, completion, and
  subquery extraction for the query language.
* ``tempoql.dataset`` — the dataset-specification adapter: loading,
  ingestion, vocabulary joins, the concept catalog, element resolution.
* ``tempoql.engine`` — the evaluator: windowed aggregation, timestep
  generation, clause operators, builtins, result export.
* ``tempoql.profiling`` / ``tempoql.store`` — result summaries and the
  versionable query store.
* ``tempoql.assistant`` — the provider-agnostic authoring assistant with
  its concept-search tool loop.
* ``tempoql.service`` — the CLI and the HTTP API serving the workbench.
* ``tempoql.synthetic`` — deterministic synthetic datasets for tests,
  demos, and benchmarks.
"""

from .errors import (
    AlignmentError,
    EvalError,
    IngestError,
    ParseError,
    QueryTypeError,
    SpecError,
    StoreError,
    TempoQLError,
)
from .values import MISSING, Value, convert_duration
from .series import AttributeSeries, EventSeries, IntervalSeries, TimeSeries, TrajectoryIndex
from .lang import complete, extract_subqueries, parse, tokenize, unparse
from .dataset import Dataset, build_catalog, ingest, load_spec, resolve_elements, search_concepts
from .engine import QueryResult, evaluate
from .profiling import SeriesProfile, profile, profile_result
from . import store

__version__ = "0.1.0"

__all__ = [
    "AlignmentError", "EvalError", "IngestError", "ParseError",
    "QueryTypeError", "SpecError", "StoreError", "TempoQLError",
    "MISSING", "Value", "convert_duration",
    "AttributeSeries", "EventSeries", "IntervalSeries", "TimeSeries",
    "TrajectoryIndex",
    "complete", "extract_subqueries", "parse", "tokenize", "unparse",
    "Dataset", "build_catalog", "ingest", "load_spec", "resolve_elements",
    "search_concepts",
    "QueryResult", "evaluate",
    "SeriesProfile", "profile", "profile_result",
    "store",
    "__version__",
]
