"""Command-line entry point: validate, query, render, report, serve, simulate.

Exit codes: 0 success, 1 model parse/validation failure, 2 I/O or network
failure, 3 usage error. Data goes to stdout; diagnostics go to stderr. With
``--json`` every subcommand prints exactly one JSON document on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading
from pathlib import Path

from .characteristics import CharacteristicRegistry, RegistryError, characteristics_table
from .constellation import build_constellation, layout
from .dsl import parse_description
from .gateway import BindingConfig, BindingError, Gateway, replay_file
from .incubator import SimParams, run as run_sim
from .model import DescriptionModel, validate
from .render import render_svg, to_yaml
from .report import ReportError, generate_report
from .store import (
    QueryParseError,
    TripleStore,
    display_term,
    model_resolver,
    parse_query,
)
from .vocab import builtin_vocabulary

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_USAGE = 3

REGISTRY_ENV = "DTINSIGHT_REGISTRY"


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with the usage-error exit code pinned to 3."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageExit()


def _host_port(text: str) -> tuple[str, int]:
    host, sep, port_text = text.rpartition(":")
    if not sep or not host or not port_text.isdigit():
        raise argparse.ArgumentTypeError(f"{text!r} is not host:port")
    return host, int(port_text)


def _replay_spec(text: str) -> tuple[str, float | None]:
    path, sep, tail = text.rpartition(":")
    if sep:
        try:
            speed = float(tail)
        except ValueError:
            return text, None
        if speed <= 0:
            raise argparse.ArgumentTypeError("replay speed must be positive")
        return path, speed
    return text, None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dtinsight", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_validate = sub.add_parser("validate", help="check a model against the vocabulary")
    p_validate.add_argument("model", help="path to a .dtdf description file")
    p_validate.add_argument("--json", action="store_true", help="machine-readable output")

    p_query = sub.add_parser("query", help="run a SELECT query over a model")
    p_query.add_argument("model", help="path to a .dtdf description file")
    p_query.add_argument(
        "--query", required=True, metavar="TEXT|@FILE", help="query text, or @file"
    )
    p_query.add_argument("--json", action="store_true", help="machine-readable output")

    p_render = sub.add_parser("render", help="write the constellation drawing")
    p_render.add_argument("model", help="path to a .dtdf description file")
    p_render.add_argument("--svg", metavar="OUT", help="write the SVG here")
    p_render.add_argument("--yaml", metavar="OUT", help="write the YAML here")
    p_render.add_argument("--json", action="store_true", help="machine-readable output")

    p_report = sub.add_parser("report", help="generate the static report site")
    p_report.add_argument("model", help="path to a .dtdf description file")
    p_report.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p_report.add_argument(
        "--registry",
        metavar="FILE",
        default=os.environ.get(REGISTRY_ENV),
        help=f"characteristics registry override (default: ${REGISTRY_ENV})",
    )
    p_report.add_argument(
        "--embed-ui", metavar="DIR", help="copy this built UI directory to OUT/app/"
    )
    p_report.add_argument("--json", action="store_true", help="machine-readable output")

    p_serve = sub.add_parser("serve", help="serve the HTTP API and telemetry stream")
    p_serve.add_argument("model", help="path to a .dtdf description file")
    p_serve.add_argument(
        "--bind", type=_host_port, default=("127.0.0.1", 8080), metavar="HOST:PORT"
    )
    p_serve.add_argument(
        "--ingest-tcp", type=_host_port, metavar="HOST:PORT",
        help="accept newline-delimited JSON samples here",
    )
    p_serve.add_argument(
        "--replay", type=_replay_spec, metavar="FILE[:SPEED]",
        help="feed recorded samples (SPEED scales timestamp gaps)",
    )
    p_serve.add_argument("--bindings", metavar="FILE", help="component binding file")
    p_serve.add_argument("--ui-dir", metavar="DIR", help="static UI bundle to serve at /")
    p_serve.add_argument("--enable-query", action="store_true")
    p_serve.add_argument("--ring-capacity", type=int, default=4096, metavar="N")
    p_serve.add_argument(
        "--registry",
        metavar="FILE",
        default=os.environ.get(REGISTRY_ENV),
        help=f"characteristics registry override (default: ${REGISTRY_ENV})",
    )

    p_sim = sub.add_parser("simulate", help="run the demo incubator simulator")
    p_sim.add_argument("--params", metavar="FILE", help="JSON file of parameter overrides")
    p_sim.add_argument("--duration", type=float, default=60.0, metavar="S")
    p_sim.add_argument(
        "--sink", required=True, metavar="tcp://HOST:PORT|FILE",
        help="where emitted samples go",
    )
    p_sim.add_argument("--seed", type=int, metavar="N")
    p_sim.add_argument("--rate", type=float, metavar="HZ", help="samples per second")
    p_sim.add_argument("--json", action="store_true", help="machine-readable output")

    return parser


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_model(path: str, json_mode: bool) -> DescriptionModel | int:
    """Parse the model at *path*, or return the exit code after reporting."""
    try:
        source = _read_text(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    result = parse_description(source)
    if result.model is None or result.diagnostics:
        if json_mode:
            doc = {
                "ok": False,
                "diagnostics": [
                    {
                        "line": d.span.line,
                        "column": d.span.column,
                        "message": d.message,
                    }
                    for d in result.diagnostics
                ],
            }
            print(json.dumps(doc, indent=2))
        for diag in result.diagnostics:
            print(f"{path}:{diag}", file=sys.stderr)
        return EXIT_INVALID
    return result.model


def _cmd_validate(args: argparse.Namespace) -> int:
    model = _load_model(args.model, args.json)
    if isinstance(model, int):
        return model
    report = validate(model, builtin_vocabulary())
    if args.json:
        doc = {
            "ok": report.ok,
            "findings": [
                {
                    "severity": f.severity,
                    "code": f.code,
                    "instance": f.instance,
                    "message": f.message,
                }
                for f in report.findings
            ],
        }
        print(json.dumps(doc, indent=2))
    else:
        for finding in report.findings:
            print(finding)
        if report.ok:
            print(f"{args.model}: ok ({len(report.warnings)} warning(s))")
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_query(args: argparse.Namespace) -> int:
    model = _load_model(args.model, args.json)
    if isinstance(model, int):
        return model
    text = args.query
    if text.startswith("@"):
        try:
            text = _read_text(text[1:])
        except OSError as exc:
            print(f"error: cannot read query file: {exc}", file=sys.stderr)
            return EXIT_IO
    vocab = builtin_vocabulary()
    try:
        query = parse_query(text, resolver=model_resolver(model.name, vocab))
    except QueryParseError as exc:
        print(f"error: bad query: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rows = TripleStore(model, vocab).select(query)
    rendered = [[display_term(t, model.name) for t in row] for row in rows]
    if args.json:
        print(json.dumps({"vars": list(query.select_vars), "rows": rendered}, indent=2))
    else:
        print("\t".join(f"?{v}" for v in query.select_vars))
        for row in rendered:
            print("\t".join(row))
    return EXIT_OK


def _validated(model: DescriptionModel) -> int | None:
    report = validate(model, builtin_vocabulary())
    if not report.ok:
        for finding in report.errors:
            print(finding, file=sys.stderr)
        return EXIT_INVALID
    return None


def _cmd_render(args: argparse.Namespace) -> int:
    if not args.svg and not args.yaml:
        print("error: nothing to do — pass --svg and/or --yaml", file=sys.stderr)
        return EXIT_USAGE
    model = _load_model(args.model, args.json)
    if isinstance(model, int):
        return model
    failed = _validated(model)
    if failed is not None:
        return failed
    vocab = builtin_vocabulary()
    graph = build_constellation(model, vocab)
    placed = layout(graph)
    written: list[str] = []
    try:
        if args.svg:
            Path(args.svg).write_text(render_svg(graph, placed), encoding="utf-8")
            written.append(args.svg)
        if args.yaml:
            Path(args.yaml).write_text(to_yaml(graph, placed), encoding="utf-8")
            written.append(args.yaml)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.json:
        print(json.dumps({"written": written}, indent=2))
    else:
        for path in written:
            print(path)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        source = Path(args.model).read_bytes()
    except OSError as exc:
        print(f"error: cannot read {args.model}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        bundle = generate_report(
            source,
            args.out,
            registry_override=args.registry,
            embed_ui=args.embed_ui,
        )
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ReportError, RegistryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.json:
        print(json.dumps({"out": args.out, "manifest": bundle.manifest}, indent=2))
    else:
        print(f"report written to {args.out}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    model = _load_model(args.model, False)
    if isinstance(model, int):
        return model
    failed = _validated(model)
    if failed is not None:
        return failed

    registry = None
    if args.registry:
        try:
            registry = CharacteristicRegistry.load(args.registry)
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        except RegistryError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID

    bindings = None
    if args.bindings:
        try:
            bindings = BindingConfig.load(args.bindings)
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        except BindingError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID

    from .telemetry import TelemetryHub

    hub = TelemetryHub(ring_capacity=args.ring_capacity)
    gateway = Gateway(
        model,
        registry=registry,
        bindings=bindings,
        hub=hub,
        ui_dir=args.ui_dir,
        enable_query=args.enable_query,
    )
    try:
        host, port = gateway.start_http(*args.bind)
    except OSError as exc:
        print(f"error: cannot bind {args.bind[0]}:{args.bind[1]}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"serving http://{host}:{port}/", file=sys.stderr)
    if args.ingest_tcp:
        try:
            ihost, iport = gateway.start_ingest_tcp(*args.ingest_tcp)
        except OSError as exc:
            gateway.stop()
            print(f"error: cannot bind ingest socket: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"ingesting tcp://{ihost}:{iport}", file=sys.stderr)
    if args.replay:
        path, speed = args.replay
        if not Path(path).is_file():
            gateway.stop()
            print(f"error: replay file {path} not found", file=sys.stderr)
            return EXIT_IO
        threading.Thread(
            target=replay_file, args=(hub, path, speed), daemon=True
        ).start()
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        gateway.stop()
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    overrides: dict = {}
    if args.params:
        try:
            raw = json.loads(_read_text(args.params))
        except OSError as exc:
            print(f"error: cannot read {args.params}: {exc}", file=sys.stderr)
            return EXIT_IO
        except json.JSONDecodeError as exc:
            print(f"error: bad params file: {exc}", file=sys.stderr)
            return EXIT_INVALID
        if not isinstance(raw, dict):
            print("error: params file must hold a JSON object", file=sys.stderr)
            return EXIT_INVALID
        overrides.update(raw)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.rate is not None:
        if args.rate <= 0:
            print("error: --rate must be positive", file=sys.stderr)
            return EXIT_USAGE
        overrides["dt"] = 1.0 / args.rate
    try:
        params = SimParams(**overrides)
    except (TypeError, ValueError) as exc:
        print(f"error: bad simulation parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        count = run_sim(params, args.duration, args.sink)
    except ConnectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: cannot write samples: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        print(json.dumps({"emitted": count, "sink": args.sink}, indent=2))
    else:
        print(f"emitted {count} samples to {args.sink}")
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "query": _cmd_query,
    "render": _cmd_render,
    "report": _cmd_report,
    "serve": _cmd_serve,
    "simulate": _cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit:
        return EXIT_USAGE
    return _COMMANDS[args.command](args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
