"""HTTP API: the contract the workbench (and scripts) talk to.

All endpoints live under ``/api``; the built workbench assets, when
present, are served at ``/`` so one process is a complete deployment. The
dataset and catalog are immutable for the process lifetime; store mutations
are serialized through a lock; query results are cached by query hash for
cursor-based paging (TTL 10 minutes, 200 rows per page).
"""

from __future__ import annotations

import base64
import hashlib
import json
import threading
import time
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import store as store_mod
from ..dataset.catalog import search_concepts
from ..engine import evaluate
from ..engine.export import result_rows
from ..errors import EvalError, ParseError, StoreError, TempoQLError
from ..lang.keywords import language_vocabulary
from ..profiling import profile_result
from ..series import series_kind
from ..assistant.flows import run_tool_loop

PAGE_SIZE = 200
RESULT_TTL_SECONDS = 600
__version__ = "0.1.0"


class ServiceState:
    def __init__(self, dataset, store_path=None, provider=None,
                 static_dir=None, assistant_sessions: int = 4):
        self.dataset = dataset
        self.catalog = dataset.catalog()
        self.store_path = Path(store_path) if store_path else None
        self.provider = provider
        self.static_dir = static_dir
        self._store_lock = threading.Lock()
        self._result_cache: dict[str, tuple[float, list, dict]] = {}
        self._cache_lock = threading.Lock()
        self._assistant_slots = threading.Semaphore(assistant_sessions)
        if self.store_path and self.store_path.exists():
            self.store = store_mod.load(self.store_path)
        else:
            self.store = store_mod.QueryStore()

    # -- store (single-writer) -------------------------------------------

    def mutate_store(self, fn):
        with self._store_lock:
            fn(self.store)
            if self.store_path:
                store_mod.save(self.store, self.store_path)

    # -- result cache ------------------------------------------------------

    def cache_result(self, rows: list, meta: dict) -> str:
        token = base64.urlsafe_b64encode(uuid.uuid4().bytes).decode().rstrip("=")
        with self._cache_lock:
            now = time.time()
            stale = [k for k, (t, _, _) in self._result_cache.items()
                     if now - t > RESULT_TTL_SECONDS]
            for k in stale:
                del self._result_cache[k]
            self._result_cache[token] = (now, rows, meta)
        return token

    def cached(self, token: str):
        with self._cache_lock:
            hit = self._result_cache.get(token)
            if hit is None or time.time() - hit[0] > RESULT_TTL_SECONDS:
                return None
            return hit[1], hit[2]


def _error_payload(exc) -> dict:
    out = {"error": str(exc)}
    span = getattr(exc, "span", None)
    if span:
        out["span"] = {"start": span[0], "end": span[1]}
    expected = getattr(exc, "expected", None)
    if expected:
        out["expected"] = expected
    return out


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="tempoql", version=__version__)

    @app.exception_handler(Exception)
    async def unhandled(request: Request, exc: Exception):
        error_id = uuid.uuid4().hex[:12]
        return JSONResponse(status_code=500,
                            content={"error": "internal error", "error_id": error_id})

    @app.get("/api/meta")
    def meta():
        spec = state.dataset.spec
        return {
            "version": __version__,
            "scopes": spec.scopes(),
            "tables": [t.source for t in spec.tables],
            "trajectory_count": len(state.dataset.index),
            "spec_fingerprint": spec.fingerprint(),
            "language": language_vocabulary(),
            "assistant_available": state.provider is not None,
        }

    @app.get("/api/catalog")
    def catalog(query: str = "", scope: str | None = None):
        try:
            result = search_concepts(state.catalog, query, scope or None)
        except TempoQLError as exc:
            return JSONResponse(status_code=400, content=_error_payload(exc))
        return {"entries": [e.to_dict() for e in result.entries],
                "truncated": result.truncated}

    @app.post("/api/query")
    async def run_query(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(status_code=400, content={"error": "malformed JSON body"})
        query_text = body.get("query") if isinstance(body, dict) else None
        if not query_text or not isinstance(query_text, str):
            return JSONResponse(status_code=400,
                                content={"error": "body must be {\"query\": \"...\"}"})
        try:
            qr = evaluate(query_text, state.dataset, state.store.bindings())
        except (ParseError, EvalError) as exc:
            state.mutate_store(lambda s: store_mod.record_history(s, query_text, False))
            return JSONResponse(status_code=422, content=_error_payload(exc))
        state.mutate_store(lambda s: store_mod.record_history(s, query_text, True))

        rows = list(result_rows(qr.result))
        meta_info = {
            "kind": series_kind(qr.result),
            "row_count": len(rows),
            "query_hash": hashlib.sha256(query_text.encode()).hexdigest()[:16],
        }
        bundle = profile_result(qr)
        page = rows[:PAGE_SIZE]
        cursor = None
        if len(rows) > PAGE_SIZE:
            token = state.cache_result(rows, meta_info)
            cursor = f"{token}:{PAGE_SIZE}"
        return {
            "result": {"kind": meta_info["kind"], "row_count": meta_info["row_count"],
                       "rows": page, "cursor": cursor},
            "profile": bundle.to_dict(),
            "diagnostics": qr.diagnostics,
        }

    @app.get("/api/query/rows")
    def more_rows(cursor: str):
        try:
            token, offset_txt = cursor.rsplit(":", 1)
            offset = int(offset_txt)
        except ValueError:
            return JSONResponse(status_code=400, content={"error": "malformed cursor"})
        hit = state.cached(token)
        if hit is None:
            return JSONResponse(status_code=404,
                                content={"error": "cursor expired; re-run the query"})
        rows, meta_info = hit
        page = rows[offset:offset + PAGE_SIZE]
        nxt = None
        if offset + PAGE_SIZE < len(rows):
            nxt = f"{token}:{offset + PAGE_SIZE}"
        return {"rows": page, "cursor": nxt, "row_count": meta_info["row_count"]}

    @app.get("/api/store")
    def get_store():
        return state.store.to_json()

    @app.get("/api/store/history")
    def get_history():
        return {"history": [vars(h) for h in state.store.history]}

    @app.put("/api/store/queries/{name}")
    async def put_query(name: str, request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(status_code=400, content={"error": "malformed JSON body"})
        text = body.get("query") if isinstance(body, dict) else None
        if not isinstance(text, str) or not text.strip():
            return JSONResponse(status_code=400,
                                content={"error": "body must be {\"query\": \"...\"}"})
        try:
            state.mutate_store(lambda s: store_mod.upsert(
                s, name, text, body.get("description", "")))
        except (ParseError, StoreError) as exc:
            return JSONResponse(status_code=422, content=_error_payload(exc))
        return {"ok": True, "name": name}

    @app.delete("/api/store/queries/{name}")
    def delete_query(name: str):
        try:
            state.mutate_store(lambda s: store_mod.remove(s, name))
        except StoreError as exc:
            return JSONResponse(status_code=404, content=_error_payload(exc))
        return {"ok": True}

    def _assistant(flow: str, payload):
        if state.provider is None:
            return JSONResponse(status_code=503,
                                content={"error": "no assistant provider configured"})
        with state._assistant_slots:
            try:
                outcome = run_tool_loop(flow, payload, state.provider,
                                        state.dataset.spec, state.catalog)
            except TempoQLError as exc:
                return JSONResponse(status_code=502, content=_error_payload(exc))
        return outcome.to_dict()

    @app.post("/api/assistant/generate")
    async def assistant_generate(request: Request):
        body = await request.json()
        return _assistant("generate", body.get("instruction", ""))

    @app.post("/api/assistant/explain")
    async def assistant_explain(request: Request):
        body = await request.json()
        return _assistant("explain", body.get("query", ""))

    @app.post("/api/assistant/fix")
    async def assistant_fix(request: Request):
        body = await request.json()
        return _assistant("fix", (body.get("query", ""), body.get("error", "")))

    static_dir = state.static_dir
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="workbench")

    return app
