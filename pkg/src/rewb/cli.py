"""Command line front end: ``rewb classify|lang|emit|bounds|check|corpus``.

Exit codes: 0 success, 1 failed check (engine mismatch, unsaturated oracle,
red corpus entry, diverging bounds), 2 unusable input (syntax, validity,
construction not applicable), 3 exhausted budget.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import harness
from .analysis import DEFAULT_CAP, BoundsDiverged, compute_bounds
from .grammar import serialize
from .mcfg import construct_mcfg, mcfg_block_trace
from .nesa import NesaStuck, build_nesa, dump as dump_nesa, run_word
from .nfa import build_nfa, dump as dump_nfa, open_sets
from .pmcfg import construct_pmcfg, functional_deref_trace
from .refstring import deref, lang_until_saturated, parse_refstring
from .syntax import max_group_index, parse_valid

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


def _emit(args: argparse.Namespace, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def cmd_classify(args: argparse.Namespace) -> int:
    info = harness.classify(args.rewb, args.cap)
    lines = [f"rewb: {info['rewb']}", f"kappa: {info['kappa']}",
             f"closed: {_yes(info['closed'])}", f"closed-star: {_yes(info['closed_star'])}"]
    bounds = info.get("bounds")
    if bounds and not bounds["diverged"]:
        lines += [f"theta: {bounds['theta']}", f"sigma: {bounds['sigma']}", f"rho: {bounds['rho']}"]
    elif bounds:
        lines.append(f"bounds: diverged above cap {bounds['cap']}")
    _emit(args, info, "\n".join(lines))
    return EXIT_OK


def cmd_lang(args: argparse.Namespace) -> int:
    result = lang_until_saturated(parse_valid(args.rewb), args.max_len, args.oracle_cap)
    words = result.sorted_words()
    payload = {"saturated": result.saturated, "max_ref_len": result.max_ref_len, "words": words}
    text = f"saturated: {str(result.saturated).lower()}\n" + "".join(f"{w or '~'}\n" for w in words)
    _emit(args, payload, text)
    return EXIT_OK if result.saturated else EXIT_FAIL


def cmd_emit(args: argparse.Namespace) -> int:
    r = parse_valid(args.rewb)
    target = args.target
    if args.trace is not None:
        return _emit_trace(args, r)
    if target == "nfa":
        nfa = build_nfa(r)
        text = dump_nfa(nfa, open_sets(nfa))
    elif target == "pmcfg":
        text = serialize(construct_pmcfg(r).grammar)
    elif target == "mcfg":
        text = serialize(construct_mcfg(r, args.cap).grammar)
    else:
        text = dump_nesa(build_nesa(r, args.cap))
    _emit(args, {"target": target, "text": text}, text)
    return EXIT_OK


def _emit_trace(args: argparse.Namespace, r) -> int:
    v = parse_refstring(args.trace)
    target = args.target
    if target == "pmcfg":
        c = construct_pmcfg(r)
        steps = [list(t) for t in functional_deref_trace(c, v)]
        text = "\n".join(" | ".join(x or "~" for x in t) for t in steps)
    elif target == "mcfg":
        c = construct_mcfg(r, args.cap)
        steps = [list(t) for t in mcfg_block_trace(c, v)]
        text = "\n".join(" | ".join(x or "~" for x in t) for t in steps)
    elif target == "nesa":
        w = deref(v)
        steps = [ident.render(w) for ident in run_word(build_nesa(r, args.cap), v, w)]
        text = "\n".join(steps)
    else:
        raise ValueError("--trace is available for pmcfg, mcfg and nesa")
    _emit(args, {"target": target, "trace": steps}, text)
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    r = parse_valid(args.rewb)
    nfa = build_nfa(r)
    try:
        report = compute_bounds(nfa, open_sets(nfa), args.cap, max_group_index(r)).report()
    except BoundsDiverged as exc:
        report = exc.report()
    if report["diverged"]:
        text = (f"diverged: cell {report['cell']} exceeds cap {report['cap']}\n"
                f"cycle: {' '.join(report['witness_cycle'])}")
    else:
        text = "\n".join(f"{k}: {report[k]}" for k in ("kappa", "theta", "sigma", "rho", "depth", "reachable_count"))
    _emit(args, report, text)
    return EXIT_FAIL if report["diverged"] else EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    engines = args.engines.split(",") if args.engines else harness.default_engines(args.rewb)
    report = harness.check(args.rewb, args.max_len, engines, args.budget, args.oracle_cap, args.cap)
    payload = report.to_json(verbose=args.verbose, timings=args.timings)
    lines = [f"rewb: {report.rewb}", f"max_len: {report.max_len}",
             f"oracle saturated: {_yes(report.saturated)}"]
    for name, run in report.runs.items():
        line = f"{name}: {len(run.words)} words"
        if args.timings:
            line += f" in {run.seconds:.3f}s"
        lines.append(line)
        if args.verbose:
            lines.append("  " + " ".join(w or "~" for w in harness.word_order(run.words)))
    for pair, diff in report.differences.items():
        status = "agree" if not (diff["only_left"] or diff["only_right"]) else (
            f"only left {diff['only_left']} only right {diff['only_right']}")
        lines.append(f"{pair}: {status}")
    if report.error:
        lines.append(f"error: {report.error}")
    lines.append("ok" if report.ok else "FAILED")
    _emit(args, payload, "\n".join(lines))
    if report.error and "budget" in report.error:
        return EXIT_BUDGET
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_corpus(args: argparse.Namespace) -> int:
    entries = harness.load_corpus(args.file)
    summary = harness.run_corpus(entries, args.max_len, args.budget, args.oracle_cap,
                                 args.cap, args.jobs, args.verbose)
    lines = []
    for entry in summary["entries"]:
        mark = "ok  " if entry["ok"] else "FAIL"
        lines.append(f"{mark} line {entry['line']}: {entry['rewb']}"
                     + "".join(f"\n     {p}" for p in entry["problems"]))
    lines.append(f"{summary['passed']}/{summary['total']} passed")
    _emit(args, summary, "\n".join(lines))
    return EXIT_OK if summary["ok"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--verbose", action="store_true", help="include word sets in reports")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="counter cap for the bounds fixpoint")

    parser = argparse.ArgumentParser(prog="rewb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="closedness, closed-star and bounds")
    p.add_argument("rewb")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("lang", parents=[common], help="bounded language from the oracle")
    p.add_argument("rewb")
    p.add_argument("--max-len", type=int, default=harness.DEFAULT_MAX_LEN)
    p.add_argument("--oracle-cap", type=int, default=harness.DEFAULT_ORACLE_CAP)
    p.set_defaults(func=cmd_lang)

    p = sub.add_parser("emit", parents=[common], help="print a construction")
    p.add_argument("rewb")
    p.add_argument("--target", choices=("pmcfg", "mcfg", "nesa", "nfa"), required=True)
    p.add_argument("--trace", metavar="REFSTRING", help="replay a ref-word instead of printing the construction")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("bounds", parents=[common], help="theta, sigma and rho")
    p.add_argument("rewb")
    p.set_defaults(func=cmd_bounds)

    for name, helptext in (("check", "compare engines on one rewb"), ("corpus", "run a corpus file")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("file" if name == "corpus" else "rewb")
        p.add_argument("--max-len", type=int, default=harness.DEFAULT_MAX_LEN)
        p.add_argument("--budget", type=int, default=harness.DEFAULT_BUDGET)
        p.add_argument("--oracle-cap", type=int, default=harness.DEFAULT_ORACLE_CAP)
        if name == "check":
            p.add_argument("--engines", help="comma separated subset of " + ",".join(harness.ENGINES))
            p.add_argument("--timings", action="store_true", help="report runtimes (not byte-deterministic)")
            p.set_defaults(func=cmd_check)
        else:
            p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                           help="worker processes (default: one per CPU)")
            p.set_defaults(func=cmd_corpus)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, NesaStuck) as exc:  # syntax, validity, not closed-star, bad ref-word
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BoundsDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
