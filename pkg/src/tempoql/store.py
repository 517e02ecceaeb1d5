"""The query store: a versionable JSON file of named queries plus history.

Stored queries are referenceable by name inside other queries, so names
must be valid identifiers and stored text must parse. Saves are atomic
(write to a temp file, then rename) and byte-stable: saving an unchanged
store reproduces the same file. Unknown top-level keys in an existing file
are preserved on save for forward compatibility.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import StoreError
from .lang import parse

HISTORY_CAP = 500
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


@dataclass
class StoredQuery:
    name: str
    query: str
    description: str = ""
    updated_at: str = ""


@dataclass
class HistoryEntry:
    query: str
    ran_at: str
    ok: bool


@dataclass
class QueryStore:
    queries: dict = field(default_factory=dict)   # name -> StoredQuery, insertion-ordered
    history: list = field(default_factory=list)   # HistoryEntry list, oldest first
    extra: dict = field(default_factory=dict)     # unknown top-level keys, preserved

    def bindings(self) -> dict:
        """name -> query text, for the evaluator."""
        return {name: sq.query for name, sq in self.queries.items()}

    def to_json(self) -> dict:
        out = {"version": 1}
        out.update(self.extra)
        out["queries"] = [
            {"name": sq.name, "query": sq.query, "description": sq.description,
             "updated_at": sq.updated_at}
            for sq in self.queries.values()
        ]
        out["history"] = [
            {"query": h.query, "ran_at": h.ran_at, "ok": h.ok} for h in self.history
        ]
        return out


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def load(path) -> QueryStore:
    path = Path(path)
    try:
        raw_text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise StoreError(f"query store not found: {path}")
    if not raw_text.strip():
        raise StoreError("query store file is empty (expected a JSON object)")
    try:
        raw = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        raise StoreError(f"invalid JSON: {exc}")
    return from_json(raw)


def from_json(raw: dict) -> QueryStore:
    if not isinstance(raw, dict):
        raise StoreError("store must be a JSON object", "/")
    queries = raw.get("queries", [])
    history = raw.get("history", [])
    if not isinstance(queries, list):
        raise StoreError("must be a list", "/queries")
    if not isinstance(history, list):
        raise StoreError("must be a list", "/history")
    store = QueryStore()
    store.extra = {k: v for k, v in raw.items()
                   if k not in ("version", "queries", "history")}
    for i, q in enumerate(queries):
        if not isinstance(q, dict) or "name" not in q or "query" not in q:
            raise StoreError("query entries need name and query", f"/queries/{i}")
        name = str(q["name"])
        if not _NAME_RE.match(name):
            raise StoreError(f"name {name!r} is not a valid identifier", f"/queries/{i}/name")
        if name in store.queries:
            raise StoreError(f"duplicate query name {name!r}", f"/queries/{i}/name")
        store.queries[name] = StoredQuery(
            name=name, query=str(q["query"]),
            description=str(q.get("description", "")),
            updated_at=str(q.get("updated_at", "")),
        )
    for i, h in enumerate(history):
        if not isinstance(h, dict) or "query" not in h:
            raise StoreError("history entries need a query", f"/history/{i}")
        store.history.append(HistoryEntry(
            query=str(h["query"]), ran_at=str(h.get("ran_at", "")),
            ok=bool(h.get("ok", True))))
    return store


def save(store: QueryStore, path) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    path = Path(path)
    payload = json.dumps(store.to_json(), indent=2, ensure_ascii=False) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=".store-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def upsert(store: QueryStore, name: str, query_text: str,
           description: str = "") -> QueryStore:
    """Add or replace a named query; the text must parse."""
    if not _NAME_RE.match(name):
        raise StoreError(f"name {name!r} is not a valid identifier")
    parse(query_text)  # raises ParseError on bad input
    store.queries[name] = StoredQuery(
        name=name, query=query_text, description=description, updated_at=_now_iso())
    return store


def remove(store: QueryStore, name: str) -> QueryStore:
    if name not in store.queries:
        raise StoreError(f"no stored query named {name!r}")
    del store.queries[name]
    return store


def record_history(store: QueryStore, query_text: str, ok: bool) -> QueryStore:
    store.history.append(HistoryEntry(query=query_text, ran_at=_now_iso(), ok=ok))
    if len(store.history) > HISTORY_CAP:
        del store.history[: len(store.history) - HISTORY_CAP]
    return store
