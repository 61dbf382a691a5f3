"""Cross-engine equivalence checks, classification, and corpus runs.

Four engines compute the bounded language of a rewb:

* ``oracle``  – derivative-based enumeration of dereferenced ref-words
* ``pmcfg``   – bounded generation from the unary PMCFG
* ``mcfg``    – bounded generation from the unary MCFG (closed-star only)
* ``nesa``    – membership queries against the stack automaton (closed-star only)

A check passes when the oracle is saturated and every pair of engines
returns the same set.
"""
from __future__ import annotations

import random
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .analysis import DEFAULT_CAP, BoundsDiverged, capt, compute_bounds, is_closed, is_closed_star
from .grammar import BudgetExceeded, generate
from .mcfg import construct_mcfg
from .nesa import NesaBudgetExceeded, build_nesa, nesa_language
from .nfa import build_nfa, open_sets
from .pmcfg import construct_pmcfg
from .refstring import lang_until_saturated
from .syntax import Alt, Concat, Epsilon, Group, Ref, Rewb, Star, Terminal, max_group_index, parse_valid, pretty

SCHEMA_VERSION = 1
ENGINES = ("oracle", "pmcfg", "mcfg", "nesa")
DEFAULT_MAX_LEN = 8
DEFAULT_BUDGET = 2_000_000
DEFAULT_ORACLE_CAP = 256


def word_order(words: Iterable[str]) -> list[str]:
    return sorted(words, key=lambda w: (len(w), w))


@dataclass
class EngineRun:
    engine: str
    words: frozenset[str]
    seconds: float
    note: str = ""


@dataclass
class CheckReport:
    rewb: str
    max_len: int
    runs: dict[str, EngineRun]
    saturated: bool
    differences: dict[str, dict[str, list[str]]]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.saturated and not any(
            d["only_left"] or d["only_right"] for d in self.differences.values())

    def to_json(self, verbose: bool = False, timings: bool = False) -> dict:
        engines = {}
        for name, run in self.runs.items():
            entry: dict = {"count": len(run.words)}
            if verbose:
                entry["words"] = word_order(run.words)
            if timings:
                entry["seconds"] = round(run.seconds, 6)
            if run.note:
                entry["note"] = run.note
            engines[name] = entry
        out = {
            "schema": SCHEMA_VERSION,
            "rewb": self.rewb,
            "max_len": self.max_len,
            "oracle_saturated": self.saturated,
            "engines": engines,
            "differences": self.differences,
            "ok": self.ok,
        }
        if self.error:
            out["error"] = self.error
        return out


class EngineError(RuntimeError):
    """An engine could not produce a complete answer (budget, divergence, ...)."""


def run_engine(engine: str, r: Rewb, max_len: int, budget: int = DEFAULT_BUDGET,
               oracle_cap: int = DEFAULT_ORACLE_CAP, cap: int = DEFAULT_CAP) -> EngineRun:
    start = time.perf_counter()
    note = ""
    if engine == "oracle":
        result = lang_until_saturated(r, max_len, oracle_cap)
        words = result.words
        note = f"max_ref_len={result.max_ref_len}" + ("" if result.saturated else " unsaturated")
    elif engine in ("pmcfg", "mcfg"):
        grammar = construct_pmcfg(r).grammar if engine == "pmcfg" else construct_mcfg(r, cap).grammar
        try:
            gen = generate(grammar, max_len, budget)
        except BudgetExceeded as exc:
            raise EngineError(f"{engine}: {exc}") from exc
        if not gen.exact:
            raise EngineError(f"{engine}: pruning without monotonicity certificate")
        words = gen.words
    elif engine == "nesa":
        words = _nesa_words(r, max_len, budget, cap)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return EngineRun(engine, frozenset(words), time.perf_counter() - start, note)


def _nesa_words(r: Rewb, max_len: int, budget: int, cap: int) -> frozenset[str]:
    try:
        return nesa_language(build_nesa(r, cap), max_len, budget)
    except NesaBudgetExceeded as exc:
        raise EngineError(f"nesa: {exc}") from exc


def check(text: str, max_len: int = DEFAULT_MAX_LEN, engines: Sequence[str] = ENGINES,
          budget: int = DEFAULT_BUDGET, oracle_cap: int = DEFAULT_ORACLE_CAP,
          cap: int = DEFAULT_CAP) -> CheckReport:
    """Run the requested engines and compare their word sets pairwise.

    Raises the construction errors (syntax, validity, not closed-star,
    divergence); engine budget problems are reported inside the result.
    """
    r = parse_valid(text)
    engines = list(dict.fromkeys(engines))
    for e in engines:
        if e not in ENGINES:
            raise ValueError(f"unknown engine {e!r}")
    runs: dict[str, EngineRun] = {}
    error = None
    for e in engines:
        try:
            runs[e] = run_engine(e, r, max_len, budget, oracle_cap, cap)
        except EngineError as exc:
            error = str(exc)
            break
    saturated = "oracle" not in runs or "unsaturated" not in runs["oracle"].note
    if "oracle" in engines and "oracle" not in runs:
        saturated = False
    differences = {}
    for a, b in combinations([e for e in engines if e in runs], 2):
        left, right = runs[a].words, runs[b].words
        differences[f"{a}-{b}"] = {
            "only_left": word_order(left - right),
            "only_right": word_order(right - left),
        }
    return CheckReport(pretty(r), max_len, runs, saturated, differences, error)


def default_engines(text: str) -> list[str]:
    """All engines that apply: mcfg and nesa need a closed-star rewb."""
    return list(ENGINES) if is_closed_star(parse_valid(text)) else ["oracle", "pmcfg"]


def classify(text: str, cap: int = DEFAULT_CAP) -> dict:
    return analyse_with_cap(parse_valid(text), cap)


def analyse_with_cap(r: Rewb, cap: int) -> dict:
    out: dict = {
        "rewb": pretty(r),
        "kappa": max_group_index(r),
        "closed": is_closed(r),
        "closed_star": is_closed_star(r),
        "capt": sorted(capt(r)),
    }
    if out["closed_star"]:
        nfa = build_nfa(r)
        try:
            out["bounds"] = compute_bounds(nfa, open_sets(nfa), cap, out["kappa"]).report()
        except BoundsDiverged as exc:  # only when the cap is too small
            out["bounds"] = exc.report()
    return out


# -- corpus ------------------------------------------------------------------------

_EXPECT_RE = re.compile(r"#\s*expect:\s*(.*)$")


@dataclass(frozen=True)
class CorpusEntry:
    line: int
    rewb: str
    expect: tuple[tuple[str, str], ...] = ()


def parse_corpus(text: str) -> list[CorpusEntry]:
    """One rewb per line; ``# expect: key=value, ...`` after it; ``#`` lines are comments."""
    entries = []
    for number, raw in enumerate(text.splitlines(), 1):
        if raw.lstrip().startswith("#"):
            continue
        body, expect = raw, ()
        m = _EXPECT_RE.search(raw)
        if m:
            body = raw[:m.start()]
            pairs = []
            for part in re.split(r"[,\s]+", m.group(1).strip()):
                if not part:
                    continue
                key, _, value = part.partition("=")
                pairs.append((key.strip(), value.strip()))
            expect = tuple(pairs)
        elif "#" in raw:
            body = raw[:raw.index("#")]
        body = body.strip()
        if body:
            entries.append(CorpusEntry(number, body, expect))
    return entries


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def run_entry(entry: CorpusEntry, max_len: int, budget: int = DEFAULT_BUDGET,
              oracle_cap: int = DEFAULT_ORACLE_CAP, cap: int = DEFAULT_CAP,
              verbose: bool = False) -> dict:
    out: dict = {"line": entry.line, "rewb": entry.rewb}
    problems: list[str] = []
    try:
        info = classify(entry.rewb, cap)
        out["classification"] = {
            "closed": _yes(info.get("closed", False)),
            "closed_star": _yes(info["closed_star"]),
            "kappa": info["kappa"],
        }
        if "bounds" in info:
            out["bounds"] = info["bounds"]
        actual = {"closed": out["classification"]["closed"],
                  "closed-star": out["classification"]["closed_star"],
                  "kappa": str(info["kappa"])}
        for key, value in entry.expect:
            if key not in actual:
                problems.append(f"unknown expectation {key}")
            elif actual[key] != value:
                problems.append(f"expected {key}={value}, got {actual[key]}")
        engines = list(ENGINES) if info["closed_star"] else ["oracle", "pmcfg"]
        report = check(entry.rewb, max_len, engines, budget, oracle_cap, cap)
        out["check"] = report.to_json(verbose=verbose)
        if not report.ok:
            problems.append(report.error or "engine mismatch or unsaturated oracle")
    except Exception as exc:  # each entry fails on its own
        problems.append(f"{type(exc).__name__}: {exc}")
    out["problems"] = problems
    out["ok"] = not problems
    return out


def run_corpus(entries: Sequence[CorpusEntry], max_len: int = DEFAULT_MAX_LEN,
               budget: int = DEFAULT_BUDGET, oracle_cap: int = DEFAULT_ORACLE_CAP,
               cap: int = DEFAULT_CAP, jobs: int = 1, verbose: bool = False) -> dict:
    args = [(e, max_len, budget, oracle_cap, cap, verbose) for e in entries]
    if jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_entry_args, args))
    else:
        results = [_run_entry_args(a) for a in args]
    return {
        "schema": SCHEMA_VERSION,
        "max_len": max_len,
        "entries": results,
        "total": len(results),
        "passed": sum(r["ok"] for r in results),
        "ok": all(r["ok"] for r in results),
    }


def _run_entry_args(args: tuple) -> dict:
    return run_entry(*args)


def load_corpus(path: str | Path) -> list[CorpusEntry]:
    return parse_corpus(Path(path).read_text())


# -- random rewbs ----------------------------------------------------------------------

def random_rewb(rng: random.Random, max_index: int = 2, letters: str = "ab", size: int = 6,
                bound_bias: float = 0.85) -> Rewb:
    """A random valid rewb with group and reference indices up to ``max_index``.

    References prefer (with probability ``bound_bias``) indices that are
    certainly captured to their left, so most of them are not trivially empty.
    """

    def leaf(forbidden: frozenset[int], bound: frozenset[int]) -> Rewb:
        allowed = [i for i in range(1, max_index + 1) if i not in forbidden]
        captured = [i for i in allowed if i in bound]
        roll = rng.random()
        if roll < 0.5 or not allowed:
            return Terminal(rng.choice(letters)) if roll < 0.45 or not allowed else Epsilon()
        if captured and rng.random() < bound_bias:
            return Ref(rng.choice(captured))
        return Ref(rng.choice(allowed))

    def gen(budget: int, forbidden: frozenset[int], bound: frozenset[int]) -> tuple[Rewb, frozenset[int]]:
        if budget <= 1:
            return leaf(forbidden, bound), frozenset()
        allowed = [i for i in range(1, max_index + 1) if i not in forbidden]
        kind = rng.choice(["concat", "concat", "concat", "alt", "star", "group", "group"])
        if kind == "group" and allowed:
            i = rng.choice(allowed)
            body, cap = gen(budget - 1, forbidden | {i}, bound)
            return Group(i, body), cap | {i}
        if kind == "star" or (kind == "group" and not allowed):
            body, cap = gen(budget - 1, forbidden, bound)
            return Star(body), cap
        split = rng.randint(1, budget - 1)
        left, lcap = gen(split, forbidden, bound)
        if kind == "alt":
            right, rcap = gen(budget - split, forbidden, bound)
            return Alt(left, right), lcap & rcap
        right, rcap = gen(budget - split, forbidden, bound | lcap)
        return Concat(left, right), lcap | rcap

    return gen(size, frozenset(), frozenset())[0]
