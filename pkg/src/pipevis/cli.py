"""Command-line entry points: `pipevis` (docs/serve) and `pipeharness` (regression)."""

from __future__ import annotations

import argparse
import fnmatch
import sys
from pathlib import Path

from .builtins import default_module_registry
from .demo import DEMO_NETWORKS
from .engine import Engine
from .errors import PipevisError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="pipevis", description="visualization pipeline engine")
    sub = parser.add_subparsers(dest="command", required=True)

    docs = sub.add_parser("docs", help="documentation bundle")
    docs_sub = docs.add_subparsers(dest="docs_command", required=True)
    docs_build = docs_sub.add_parser("build", help="write the static doc bundle")
    docs_build.add_argument("--out", required=True, help="output directory")

    serve_cmd = sub.add_parser("serve", help="run the HTTP service")
    serve_cmd.add_argument("--bind", default="127.0.0.1:8700", help="host:port to bind")
    serve_cmd.add_argument("--workspace", help="workspace file to load at startup")
    serve_cmd.add_argument("--demo", choices=sorted(DEMO_NETWORKS),
                           help="start with a demo pipeline")
    serve_cmd.add_argument("--queue-size", type=int, default=256)

    args = parser.parse_args(argv)
    if args.command == "docs":
        from .docgen import build_docs

        registry = default_module_registry()
        summary = build_docs(registry, args.out)
        print(f"wrote {summary.pages} processor pages to {args.out}")
        for warning in summary.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        return 0

    if args.command == "serve":
        from .service import serve
        from .workspace import load_workspace

        registry = default_module_registry()
        engine = Engine(registry=registry)
        if args.workspace:
            engine.network = load_workspace(registry, args.workspace)
        elif args.demo:
            engine.network = DEMO_NETWORKS[args.demo](registry)
        serve(engine, bind=args.bind, queue_size=args.queue_size)
        return 0

    parser.error(f"unknown command {args.command}")
    return 2


def harness_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="pipeharness", description="pipeline regression harness")
    sub = parser.add_subparsers(dest="command", required=True)

    run_cmd = sub.add_parser("run", help="discover and run regression tests")
    run_cmd.add_argument("--tests", required=True, help="test root directory")
    run_cmd.add_argument("--out", required=True, help="report output directory")
    run_cmd.add_argument("--filter", default=None, help="glob filtering test names")

    init_cmd = sub.add_parser("init", help="create a test from a workspace")
    init_cmd.add_argument("--workspace", required=True, help="workspace file")
    init_cmd.add_argument("--test", required=True, help="test directory to create")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            from .harness import HISTORY_NAME, discover_tests, render_report, run_all

            registry = default_module_registry()
            cases, diagnostics = discover_tests(args.tests)
            for note in diagnostics:
                print(f"note: {note}", file=sys.stderr)
            if args.filter:
                cases = [c for c in cases if fnmatch.fnmatch(c.name, args.filter)]
            results = run_all(cases, registry)
            out = Path(args.out)
            index = render_report(results, out / HISTORY_NAME, out)
            passed = sum(1 for r in results if r.passed)
            print(f"{passed}/{len(results)} tests passed; report: {index}")
            for result in results:
                print(f"  [{'PASS' if result.passed else 'FAIL'}] {result.name}")
            return 0 if passed == len(results) else 1

        if args.command == "init":
            from .harness import create_test
            from .workspace import load_workspace

            registry = default_module_registry()
            net = load_workspace(registry, args.workspace)
            case = create_test(net, args.test)
            print(f"created test {case.name!r} with outputs: {sorted(case.references)}")
            return 0
    except PipevisError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
