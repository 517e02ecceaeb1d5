"""Command-line entry points.

Subcommands: ``catalog`` (search concepts), ``run`` (evaluate and export),
``profile`` (print the profile bundle), ``queries`` (manage the store), and
``serve`` (start the HTTP API + workbench).

Exit codes: 0 ok, 1 parse/evaluation error, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .. import store as store_mod
from ..dataset import ingest, load_spec
from ..dataset.catalog import search_concepts
from ..engine import evaluate
from ..engine.export import export_result
from ..errors import (
    EvalError,
    IngestError,
    ParseError,
    SpecError,
    StoreError,
    TempoQLError,
)
from ..profiling import profile_result

EXIT_OK = 0
EXIT_QUERY = 1
EXIT_USAGE = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tempoql",
                                description="Temporal queries over trajectory data")
    sub = p.add_subparsers(dest="command")

    cat = sub.add_parser("catalog", help="browse the concept catalog")
    catsub = cat.add_subparsers(dest="catalog_command")
    search = catsub.add_parser("search", help="search concepts by name")
    search.add_argument("query")
    search.add_argument("--dataset", required=True, help="dataset specification JSON")
    search.add_argument("--scope")
    search.add_argument("--json", action="store_true", dest="as_json")

    run = sub.add_parser("run", help="evaluate a query and export the result")
    run.add_argument("--dataset", required=True)
    group = run.add_mutually_exclusive_group(required=True)
    group.add_argument("--query", help="query text")
    group.add_argument("--name", help="name of a stored query")
    run.add_argument("--store", help="query store JSON (for named references)")
    run.add_argument("--out", required=True, help="output file")
    run.add_argument("--format", choices=["csv", "json"], default="csv")

    prof = sub.add_parser("profile", help="evaluate a query and print its profile bundle")
    prof.add_argument("--dataset", required=True)
    prof.add_argument("--query", required=True)
    prof.add_argument("--store")

    q = sub.add_parser("queries", help="manage the query store")
    qsub = q.add_subparsers(dest="queries_command")
    qlist = qsub.add_parser("list")
    qlist.add_argument("--store", required=True)
    qadd = qsub.add_parser("add")
    qadd.add_argument("name")
    qadd.add_argument("query")
    qadd.add_argument("--store", required=True)
    qadd.add_argument("--description", default="")
    qadd.add_argument("--force", action="store_true",
                      help="overwrite an existing name")
    qrm = qsub.add_parser("rm")
    qrm.add_argument("name")
    qrm.add_argument("--store", required=True)

    serve = sub.add_parser("serve", help="start the HTTP API and workbench")
    serve.add_argument("--dataset", required=True)
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--store")
    serve.add_argument("--provider-config", help="assistant provider JSON config")
    serve.add_argument("--static-dir", help="workbench asset directory to serve at /")
    return p


def _load_dataset(path):
    spec = load_spec(path)
    return ingest(spec)


def _load_store(path):
    if not path:
        return store_mod.QueryStore()
    return store_mod.load(path)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_USAGE
    try:
        return _dispatch(args, parser)
    except (ParseError, EvalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except (SpecError, IngestError, StoreError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TempoQLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUERY


def _dispatch(args, parser) -> int:
    if args.command == "catalog":
        if args.catalog_command != "search":
            parser.parse_args(["catalog", "--help"])
            return EXIT_USAGE
        dataset = _load_dataset(args.dataset)
        result = search_concepts(dataset.catalog(), args.query, args.scope)
        if args.as_json:
            print(json.dumps({"entries": [e.to_dict() for e in result.entries],
                              "truncated": result.truncated}, indent=2))
        else:
            for e in result.entries:
                cid = e.concept_id or "-"
                print(f"{e.scope}\t{e.name}\t{e.element_kind}\t{cid}\t{e.occurrence_count}")
            if result.truncated:
                print("... (truncated at 100)", file=sys.stderr)
        return EXIT_OK

    if args.command == "run":
        dataset = _load_dataset(args.dataset)
        store = _load_store(args.store)
        if args.name:
            if args.name not in store.queries:
                print(f"error: no stored query named {args.name!r}", file=sys.stderr)
                return EXIT_USAGE
            query_text = store.queries[args.name].query
        else:
            query_text = args.query
        qr = evaluate(query_text, dataset, store.bindings())
        sidecar = export_result(qr, dataset, args.out, args.format)
        print(f"wrote {sidecar['row_count']} rows to {args.out}")
        for d in qr.diagnostics:
            print(f"note: {d}", file=sys.stderr)
        return EXIT_OK

    if args.command == "profile":
        dataset = _load_dataset(args.dataset)
        store = _load_store(args.store)
        qr = evaluate(args.query, dataset, store.bindings())
        print(json.dumps(profile_result(qr).to_dict(), indent=2))
        return EXIT_OK

    if args.command == "queries":
        return _queries(args, parser)

    if args.command == "serve":
        return _serve(args)

    parser.print_help()
    return EXIT_USAGE


def _queries(args, parser) -> int:
    if args.queries_command == "list":
        store = store_mod.load(args.store)
        for sq in store.queries.values():
            desc = f"  # {sq.description}" if sq.description else ""
            print(f"{sq.name}: {sq.query}{desc}")
        return EXIT_OK
    if args.queries_command == "add":
        try:
            store = store_mod.load(args.store)
        except StoreError:
            store = store_mod.QueryStore()
        if args.name in store.queries and not args.force:
            print(f"error: {args.name!r} already exists (use --force to overwrite)",
                  file=sys.stderr)
            return EXIT_USAGE
        store_mod.upsert(store, args.name, args.query, args.description)
        store_mod.save(store, args.store)
        print(f"saved {args.name!r}")
        return EXIT_OK
    if args.queries_command == "rm":
        store = store_mod.load(args.store)
        store_mod.remove(store, args.name)
        store_mod.save(store, args.store)
        print(f"removed {args.name!r}")
        return EXIT_OK
    parser.parse_args(["queries", "--help"])
    return EXIT_USAGE


def _serve(args) -> int:
    import uvicorn

    from ..assistant.providers import HttpProvider, MockProvider, ProviderConfig
    from .api import ServiceState, create_app

    dataset = _load_dataset(args.dataset)
    provider = None
    if args.provider_config:
        cfg = ProviderConfig.from_file(args.provider_config)
        provider = cfg if isinstance(cfg, MockProvider) else HttpProvider(cfg)
    state = ServiceState(dataset, store_path=args.store, provider=provider,
                         static_dir=args.static_dir)
    app = create_app(state)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
