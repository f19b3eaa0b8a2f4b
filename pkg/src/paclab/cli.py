"""Command-line interface: a thin client of the paclab service.

By default every subcommand talks to the FastAPI app in-process (no server
needed); `--url` points the same client at a remote instance instead, and
`serve` starts one.  All file output is written with pinned newlines so a
repeated invocation with identical flags and seed is byte-identical.

Exit codes: 0 success; 1 a verdict came back false (validation failed, a
reduction row disagreed, or an experiment missed its confidence target);
2 usage or parse errors; 3 internal invariant violations.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any

__all__ = ["main", "entry", "build_parser"]

EXIT_OK = 0
EXIT_VERDICT_FALSE = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


class CliFailure(Exception):
    """Carries an exit code and a message for the main() wrapper."""

    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Client plumbing
# ---------------------------------------------------------------------------

def make_client(url: str | None):
    """In-process test client by default; an HTTP client when --url is given."""
    if url:
        import httpx

        return httpx.Client(base_url=url, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # The test-client shim may warn about its transport backend at import
        # time; that chatter belongs to the library, not to CLI users.
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def call(client, path: str, payload: dict[str, Any]) -> dict[str, Any]:
    response = client.post(path, json=payload)
    if response.status_code == 200:
        return response.json()
    try:
        body = response.json()
    except ValueError:
        body = {"detail": response.text}
    detail = body.get("detail", str(body))
    category = body.get("category", "error")
    if response.status_code >= 500 or category == "invariant-violation":
        raise CliFailure(EXIT_INTERNAL, f"{category}: {detail}")
    raise CliFailure(EXIT_USAGE, f"{category}: {detail}")


def read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliFailure(EXIT_USAGE, f"cannot read {path!r}: {exc}") from exc


def write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliFailure(EXIT_USAGE, f"cannot write {path!r}: {exc}") from exc


def emit(args: argparse.Namespace, text: str) -> None:
    """Write the payload to --out when given, else print it."""
    if args.out:
        write_text(args.out, text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


# ---------------------------------------------------------------------------
# Class-spec arguments
# ---------------------------------------------------------------------------

def class_spec_from_args(args: argparse.Namespace) -> dict[str, Any]:
    """Build the service's ClassSpec payload from --class/--family arguments."""
    spec: dict[str, Any] = {"dedup": bool(getattr(args, "dedup", False))}
    file_path = getattr(args, "class_file", None)
    family = getattr(args, "family", None)
    if (file_path is None) == (family is None):
        raise CliFailure(
            EXIT_USAGE, "give exactly one class source: --class FILE or --family NAME"
        )
    if file_path is not None:
        text = read_text(file_path)
        head = next(
            (ln.strip() for ln in text.splitlines() if ln.strip() and not
             ln.strip().startswith("#")),
            "",
        )
        if head.startswith("horizon "):
            spec["tree_text"] = text
        elif head.startswith("window "):
            spec["enum_text"] = text
        else:
            raise CliFailure(
                EXIT_USAGE,
                f"{file_path!r} must start with 'horizon D' (tree) or "
                f"'window W' (enumeration)",
            )
        return spec
    if args.window is None:
        raise CliFailure(EXIT_USAGE, f"--family {family} needs --window")
    spec["family"] = family
    spec["window"] = args.window
    spec["budget"] = getattr(args, "budget", None)
    spec["max_index"] = getattr(args, "max_index", None)
    return spec


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_vc(args: argparse.Namespace, client) -> int:
    payload = {
        "class_spec": class_spec_from_args(args),
        "window": args.window,
        "cap": args.cap,
    }
    result = call(client, "/vc", payload)
    text = (
        f"vc = {result['rendered']}\n"
        f"shattered = {','.join(str(p) for p in result['shattered'])}\n"
    )
    emit(args, text)
    return EXIT_OK


def cmd_witness(args: argparse.Namespace, client) -> int:
    if args.tuples == "all":
        tuples = None
    else:
        tuples = []
        for lineno, raw in enumerate(read_text(args.tuples).splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                tuples.append([int(p) for p in line.split(",")])
            except ValueError as exc:
                raise CliFailure(
                    EXIT_USAGE, f"tuples line {lineno}: {exc}"
                ) from exc
    payload = {
        "class_spec": class_spec_from_args(args),
        "d": args.d,
        "tuples": tuples,
        "window": args.window,
    }
    result = call(client, "/witness", payload)
    emit(args, result["certificate"])
    return EXIT_OK


def cmd_erm(args: argparse.Namespace, client) -> int:
    payload = {
        "class_spec": class_spec_from_args(args),
        "sample": read_text(args.sample),
        "tree": True if args.tree else None,
    }
    result = call(client, "/erm", payload)
    risk = result["empirical_risk"]
    text = (
        f"table = {result['table']}\n"
        f"completion = {result['completion']}\n"
        f"empirical_risk = {risk if risk is not None else '-'}\n"
    )
    emit(args, text)
    return EXIT_OK


def _validation_outcome(args: argparse.Namespace, result: dict[str, Any], kind: str) -> int:
    if result["ok"]:
        print(f"{kind}: PASS")
        return EXIT_OK
    dump = args.out or f"{kind}_violation_sample.txt"
    write_text(dump, result["counterexample"] or "")
    print(f"{kind}: FAIL — {result['reason']} (sample written to {dump})")
    return EXIT_VERDICT_FALSE


def cmd_validate_erm(args: argparse.Namespace, client) -> int:
    payload = {
        "class_spec": class_spec_from_args(args),
        "tree": True if args.tree else None,
        "samples": [read_text(p) for p in args.sample] if args.sample else None,
        "seed": args.seed if args.seed is not None else 0,
        "count": args.count,
        "max_size": args.max_size,
    }
    result = call(client, "/validate/erm", payload)
    return _validation_outcome(args, result, "validate-erm")


def cmd_validate_aerm(args: argparse.Namespace, client) -> int:
    payload = {
        "class_spec": class_spec_from_args(args),
        "stages": args.stages,
        "schedule": read_text(args.eps) if args.eps else None,
        "samples": [read_text(p) for p in args.sample] if args.sample else None,
        "seed": args.seed if args.seed is not None else 0,
        "count": args.count,
        "max_size": args.max_size,
    }
    result = call(client, "/validate/aerm", payload)
    return _validation_outcome(args, result, "validate-aerm")


def cmd_halting_table(args: argparse.Namespace, client) -> int:
    payload = {"max_index": args.max, "budget": args.budget}
    result = call(client, "/machine/halting-table", payload)
    emit(args, result["csv"])
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace, client) -> int:
    payload = {
        "max_index": args.max,
        "budget": args.budget,
        "m": args.m,
        "window": args.window,
    }
    result = call(client, "/machine/reduce", payload)
    emit(args, result["csv"])
    if not result["all_agree"]:
        print("reduce: learner and simulation disagree", file=sys.stderr)
        return EXIT_VERDICT_FALSE
    return EXIT_OK


def cmd_pac_run(args: argparse.Namespace, client) -> int:
    config: dict[str, str] = {}
    if args.config:
        from .harness import parse_config_text
        from .core import FormatError

        try:
            config.update(parse_config_text(read_text(args.config)))
        except FormatError as exc:
            raise CliFailure(EXIT_USAGE, str(exc)) from exc
    overrides = {
        "family": args.family,
        "window": args.window,
        "budget": getattr(args, "budget", None),
        "max_index": getattr(args, "max_index", None),
        "learner": args.learner,
        "distribution": args.distribution,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "trials": args.trials,
        "seed": args.seed,
        "m_override": args.m_override,
    }
    for key, value in overrides.items():
        if value is not None:
            config[key] = str(value)
    result = call(client, "/pac/run", {"config": config})
    if args.out:
        write_text(args.out, result["report_csv"])
    else:
        print(result["report_csv"], end="")
    print(
        f"m = {result['m']}, trials = {result['trials']}, "
        f"success_rate = {result['success_rate']}, "
        f"verdict = {'pass' if result['verdict'] else 'fail'}"
    )
    return EXIT_OK if result["verdict"] else EXIT_VERDICT_FALSE


def cmd_enumerate(args: argparse.Namespace, client) -> int:
    payload = {"class_spec": class_spec_from_args(args), "limit": args.limit}
    result = call(client, "/class/enumerate", payload)
    emit(args, result["text"])
    return EXIT_OK


def cmd_encode(args: argparse.Namespace, client) -> int:
    result = call(client, "/machine/encode", {"program": read_text(args.program)})
    emit(args, result["code"] + "\n")
    return EXIT_OK


def cmd_decode(args: argparse.Namespace, client) -> int:
    result = call(client, "/machine/decode", {"code": args.code})
    if result["canonical"]:
        print("note: malformed code, normalized to the canonical HALT program",
              file=sys.stderr)
    emit(args, result["program"])
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, client) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paclab",
        description="Workbench for computable PAC learning at desk scale.",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="64-bit master seed for anything randomized")
    common.add_argument("--out", default=None,
                        help="write the primary output to this file")
    common.add_argument("--window", type=int, default=None,
                        help="domain window / tree horizon")
    common.add_argument("--url", default=None,
                        help="base URL of a running service (default: in-process)")

    klass = argparse.ArgumentParser(add_help=False)
    klass.add_argument("--class", dest="class_file", default=None,
                       help="class file ('horizon D' tree or 'window W' enumeration)")
    klass.add_argument("--family", default=None,
                       choices=["monotone", "cut", "thresholds", "counterexample",
                                "full-tree", "all"],
                       help="built-in family (needs --window)")
    klass.add_argument("--budget", type=int, default=None,
                       help="step budget (counterexample family)")
    klass.add_argument("--max-index", dest="max_index", type=int, default=None,
                       help="program indices below this (counterexample family)")
    klass.add_argument("--dedup", action="store_true",
                       help="collapse extensionally equal hypotheses")

    fuzz = argparse.ArgumentParser(add_help=False)
    fuzz.add_argument("--sample", action="append", default=None,
                      help="explicit sample file (repeatable); default: fuzz battery")
    fuzz.add_argument("--count", type=int, default=200,
                      help="fuzz battery size (default 200)")
    fuzz.add_argument("--max-size", dest="max_size", type=int, default=8,
                      help="largest fuzz sample size (default 8)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vc", parents=[common, klass],
                       help="VC dimension (capped) and one maximal shattered set")
    p.add_argument("--cap", type=int, default=4, help="search cap (default 4)")
    p.set_defaults(handler=cmd_vc)

    p = sub.add_parser("witness", parents=[common, klass],
                       help="emit a d-witness certificate")
    p.add_argument("--d", type=int, required=True, help="witness order d")
    p.add_argument("--tuples", default="all",
                   help="'all' or a file of comma-separated (d+1)-tuples")
    p.set_defaults(handler=cmd_witness)

    p = sub.add_parser("erm", parents=[common, klass],
                       help="run the proper ERM learner on a sample file")
    p.add_argument("--sample", required=True, help="sample file of 'x,y' lines")
    p.add_argument("--tree", action="store_true",
                   help="require the tree learner (inferred by default)")
    p.set_defaults(handler=cmd_erm)

    p = sub.add_parser("validate-erm", parents=[common, klass, fuzz],
                       help="check properness and exact risk minimality")
    p.add_argument("--tree", action="store_true",
                   help="require the tree learner (inferred by default)")
    p.set_defaults(handler=cmd_validate_erm)

    p = sub.add_parser("validate-aerm", parents=[common, klass, fuzz],
                       help="check the asymptotic ERM inequality against a schedule")
    p.add_argument("--eps", default=None,
                   help="epsilon-schedule file (default: certify one in place)")
    p.add_argument("--stages", default="full", choices=["full", "linear"],
                   help="stage schedule (default full)")
    p.set_defaults(handler=cmd_validate_aerm)

    p = sub.add_parser("halting-table", parents=[common],
                       help="CSV of halting steps within a budget")
    p.add_argument("--max", type=int, required=True, help="indices below this")
    p.add_argument("--budget", type=int, required=True, help="step budget")
    p.set_defaults(handler=cmd_halting_table)

    p = sub.add_parser("reduce", parents=[common],
                       help="compare the learner's halting verdicts with simulation")
    p.add_argument("--max", type=int, required=True, help="indices below this")
    p.add_argument("--budget", type=int, required=True, help="step budget")
    p.add_argument("--m", type=int, default=1, help="query sample size (default 1)")
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("pac-run", parents=[common, klass],
                       help="Monte-Carlo PAC experiment from a config and/or flags")
    p.add_argument("--config", default=None, help="'key = value' config file")
    p.add_argument("--learner", default=None, choices=["erm", "erm-tree"])
    p.add_argument("--distribution", default=None,
                   help="threshold:t | pointmass:x,y | uniform:x,y;... | file:PATH")
    p.add_argument("--epsilon", default=None, help="accuracy target in (0,1)")
    p.add_argument("--delta", default=None, help="confidence target in (0,1)")
    p.add_argument("--trials", type=int, default=None, help="number of trials")
    p.add_argument("--m-override", dest="m_override", type=int, default=None,
                   help="fix the sample size instead of computing it")
    p.set_defaults(handler=cmd_pac_run)

    p = sub.add_parser("enumerate", parents=[common, klass],
                       help="materialize a class as an enumerated-class file")
    p.add_argument("--limit", type=int, default=None,
                   help="keep only the first N hypotheses")
    p.set_defaults(handler=cmd_enumerate)

    p = sub.add_parser("encode", parents=[common],
                       help="program text file to decimal index")
    p.add_argument("--program", required=True, help="program text file")
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("decode", parents=[common],
                       help="decimal index to program text")
    p.add_argument("--code", required=True, help="decimal program index")
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("serve", parents=[common],
                       help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help; surface the
        # code as a return value so callers can treat main() as a function.
        return int(exc.code or 0)
    client = None
    try:
        if args.command != "serve":
            client = make_client(args.url)
        return args.handler(args, client)
    except CliFailure as failure:
        print(f"paclab: {failure}", file=sys.stderr)
        return failure.code
    except Exception as exc:  # noqa: BLE001 — anything else is an internal bug
        print(f"paclab: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        if client is not None:
            client.close()


def entry() -> None:
    sys.exit(main())
