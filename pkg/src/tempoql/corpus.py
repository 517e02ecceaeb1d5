"""Bundled reference queries and query/SQL benchmark pairs.

The corpus drives the acceptance suite: every entry must parse and
round-trip, and entries with a dataset name also evaluate against the
matching synthetic fixture. The benchmark pairs carry a SQL equivalent for
each query category, used for the conciseness comparison.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources


@dataclass
class CorpusEntry:
    id: str
    group: str
    query: str
    dataset: str | None  # icu | drug | loinc | None (parse-only)


def _load(name: str):
    return json.loads(resources.files("tempoql.resources")
                      .joinpath(name).read_text(encoding="utf-8"))


def load_corpus() -> tuple[list[CorpusEntry], dict]:
    """Returns (entries, stores) where stores maps dataset name to the
    named-query bindings its entries rely on."""
    raw = _load("query_corpus.json")
    entries = [CorpusEntry(**q) for q in raw["queries"]]
    return entries, raw["stores"]


def load_benchmark_pairs() -> list[dict]:
    return _load("benchmark_pairs.json")


# one lexical token: word, number, quoted string, backtick name, or operator
_TOKEN_RE = re.compile(
    r"[A-Za-z_][A-Za-z0-9_]*"
    r"|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?"
    r"|'(?:\\.|[^'])*'"
    r'|"(?:\\.|[^"])*"'
    r"|`[^`]*`"
    r"|[<>!=]=|<|>"
    r"|\S"
)


def count_code_tokens(text: str) -> int:
    """Language-neutral lexical token count, applied identically to both
    sides of a comparison."""
    return len(_TOKEN_RE.findall(text))


def conciseness_ratios() -> list[tuple[str, float]]:
    """Per-category SQL:query token ratios for the benchmark pairs."""
    out = []
    for pair in load_benchmark_pairs():
        q = count_code_tokens(pair["tempoql"])
        s = count_code_tokens(pair["sql"])
        out.append((pair["category"], s / q))
    return out
