#!/usr/bin/env python3
"""xltlef - satisfiability and validity of first-order temporal formulas with event freezing

Commands:
    check FILE       decide the problem's check line (valid or sat)
    translate FILE   print a pipeline stage (core, discrete, ltlnext, fts)
    eval FILE        evaluate the formula on a trace file
    export FILE      write the fair transition system for external checkers
    selftest         run the randomized property suites

Exit codes: 0 valid / sat / true / suite ok, 1 refuted / false / suite failed,
2 unknown, 3 usage or input error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core.errors import ParseError, XltlefError  # noqa: E402
from core.settings import load_settings, set_settings  # noqa: E402

EXIT_USAGE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xltlef", description="XLTL-EF satisfiability and validity checker")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    parser.add_argument("--pedantic", action="store_true", help="warn on difference time atoms")
    parser.add_argument("--config", type=Path, help="settings file (default config/settings.yaml)")
    parser.add_argument("--format", choices=("text", "json"), dest="output_format")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="decide validity or satisfiability")
    check.add_argument("file", type=Path)
    check.add_argument("--mode", choices=("auto", "bmc", "kind", "kliveness"))
    check.add_argument("--check", choices=("valid", "sat"), dest="check_kind", help="override the file's check line")
    check.add_argument("--k-max", type=int)
    check.add_argument("--n-max", type=int)
    check.add_argument("--bmc-k-max", type=int, dest="bmc_sat_k_max")
    check.add_argument("--solver-cmd", dest="solver_command")
    check.add_argument("--timeout", type=float, dest="timeout_s")
    check.add_argument("--time-model", choices=("discrete", "dense", "super_dense"))
    check.add_argument("--witness", dest="witness_dir", help="directory for witness files")

    translate = commands.add_parser("translate", help="print a pipeline stage")
    translate.add_argument("file", type=Path)
    translate.add_argument("--stage", choices=("core", "discrete", "ltlnext", "fts"), default="ltlnext")
    translate.add_argument("--check", choices=("valid", "sat"), dest="check_kind")
    translate.add_argument("--time-model", choices=("discrete", "dense", "super_dense"))

    evaluate = commands.add_parser("eval", help="evaluate the formula on a trace")
    evaluate.add_argument("file", type=Path)
    evaluate.add_argument("--trace", type=Path, required=True)
    evaluate.add_argument("--at", default="0", help="position (discrete) or time (interval trace)")

    export = commands.add_parser("export", help="write the transition system")
    export.add_argument("file", type=Path)
    export.add_argument("-o", "--output", type=Path)
    export.add_argument("--check", choices=("valid", "sat"), dest="check_kind")
    export.add_argument("--time-model", choices=("discrete", "dense", "super_dense"))

    selftest = commands.add_parser("selftest", help="run the property suites")
    selftest.add_argument("--seed", type=int)
    selftest.add_argument("--cases", type=int)
    selftest.add_argument("--suite", action="append", dest="suites")
    selftest.add_argument("--workers", type=int)
    selftest.add_argument("--solver-cmd", dest="solver_command")
    return parser


def _config(args: argparse.Namespace):
    config = load_settings(args.config)
    overrides = {name: getattr(args, name, None) for name in (
        "mode", "k_max", "n_max", "bmc_sat_k_max", "solver_command", "timeout_s",
        "time_model", "witness_dir", "output_format", "seed", "cases", "workers")}
    config = config.with_overrides(pedantic=args.pedantic or None, **overrides)
    set_settings(config)
    return config


def _load_problem(args: argparse.Namespace, config):
    from core.parser import parse_file

    return parse_file(args.file, pedantic=config.pedantic)


def _emit(config, text: str, data: dict) -> None:
    if config.output_format == "json":
        print(json.dumps(data, indent=2))
    else:
        print(text)


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_check(args: argparse.Namespace, config) -> int:
    from backend.check import check, write_witness

    problem = _load_problem(args, config)
    verdict = check(problem, config, args.check_kind)
    if verdict.witness is not None and config.witness_dir:
        write_witness(verdict, config.witness_dir, args.file.stem)
    _emit(config, verdict.describe(), dict(verdict.to_dict(), file=str(args.file)))
    return verdict.exit_code


def _pipeline(args: argparse.Namespace, config):
    from core.logic import TimeModel
    from core.pipeline import run_pipeline

    problem = _load_problem(args, config)
    model = TimeModel.from_name(args.time_model) if args.time_model else problem.time_model
    kind = args.check_kind or problem.check
    return run_pipeline(problem, model, negate=kind == "valid")


def cmd_translate(args: argparse.Namespace, config) -> int:
    from backend.export import export
    from backend.fts import build_fts
    from core.printer import pretty

    run = _pipeline(args, config)
    if args.stage == "core":
        text = pretty(run.core)
    elif args.stage == "discrete":
        text = pretty(run.discretized.formula)
    elif args.stage == "ltlnext":
        lines = [pretty(run.ltlnext.formula)]
        for b in run.ltlnext.bindings:
            lines.append(f"{b.var} := {pretty(b.ef_term)} ({b.direction}, default {b.default})")
        text = "\n".join(lines)
    else:
        text = export(build_fts(run.ltlnext)).rstrip("\n")
    _emit(config, text, {"stage": args.stage, "model": run.model.value, "negated": run.negated,
                         "artifact": text})
    return 0


def cmd_eval(args: argparse.Namespace, config) -> int:
    from fractions import Fraction

    from oracle.evaluator import eval_dense, eval_discrete
    from oracle.traces import IntervalTrace, load_trace

    problem = _load_problem(args, config)
    trace = load_trace(args.trace)
    if isinstance(trace, IntervalTrace):
        value = eval_dense(trace, Fraction(args.at), problem.formula, problem.signature)
    else:
        value = eval_discrete(trace, int(args.at), problem.formula, problem.signature)
    _emit(config, "true" if value else "false", {"file": str(args.file), "trace": str(args.trace),
                                                  "at": args.at, "value": value})
    return 0 if value else 1


def cmd_export(args: argparse.Namespace, config) -> int:
    from backend.export import export
    from backend.fts import build_fts

    text = export(build_fts(_pipeline(args, config).ltlnext))
    if args.output:
        args.output.write_text(text, encoding="utf-8")
        print(f"Exported to {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def cmd_selftest(args: argparse.Namespace, config) -> int:
    from oracle.suite import run_property_suite

    report = run_property_suite(config.seed, config.cases, args.suites, config)
    _emit(config, report.summary(), report.to_dict())
    return 0 if report.ok else 1


COMMANDS = {
    "check": cmd_check,
    "translate": cmd_translate,
    "eval": cmd_eval,
    "export": cmd_export,
    "selftest": cmd_selftest,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        config = _config(args)
        return COMMANDS[args.command](args, config)
    except ParseError as e:
        for d in e.diagnostics:
            print(f"{e.source}:{d}", file=sys.stderr)
        return EXIT_USAGE
    except XltlefError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
