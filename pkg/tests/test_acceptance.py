"""End-to-end acceptance checks, one test per criterion.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion. Time limits are measured with
``time.perf_counter`` around the work each criterion names.
"""
import random
import time

import pytest

from conftest import (
    COPY, EXPECTED_BODIES, EXPECTED_RULES, NESTED, NOT_CLOSED_STAR, corpus_entries, same_up_to_renaming,
)
from rewb.analysis import BoundsDiverged, compute_bounds, is_closed, is_closed_star, ts_sequence
from rewb.grammar import bounded_language, is_nonduplicating, is_unary
from rewb.harness import run_corpus
from rewb.mcfg import build_mcfg, check_valid_copies, construct_mcfg, mcfg_block_trace
from rewb.nesa import build_nesa, nonerasing_audit, run_word
from rewb.nfa import build_nfa, open_sets
from rewb.pmcfg import build_pmcfg, construct_pmcfg, functional_deref_trace
from rewb.refstring import (
    LETTER, NUM, OPEN, close, deref, is_matching, lang_until_saturated, letter, mem, num, open_, open_set,
    parse_refstring, ref_enumerate,
)
from rewb.syntax import max_group_index, parse_valid

WORKED_EXAMPLES = [
    COPY,
    NOT_CLOSED_STAR,
    NESTED,
    r"(_1a*)_1c\1",
    r"((_1a*)_1c\1)*",
    r"\1+(_1a*)_1c\1",
    r"(_1a*)_1\1",
    r"(_1a*)_1\2",
    r"\1",
]


def best_of(fn, repeat=5):
    """Smallest wall time of ``repeat`` calls, and the last result."""
    best, result = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def all_words(alphabet, max_len):
    out = [""]
    layer = [""]
    for _ in range(max_len):
        layer = [w + a for w in layer for a in alphabet]
        out += layer
    return out


@pytest.mark.criterion(1, "worked dereferencing examples")
def test_criterion_1_deref_examples():
    cases = {
        "[1 a [2 b ]2 #2 ]1 #1": "abbabb",
        "[1 a ]1 #1 [1 b b ]1 #1": "aabbbb",
        "a b c #1 #2": "abc",
    }
    for text, expected in cases.items():
        v = parse_refstring(text)
        seconds, got = best_of(lambda: deref(v))
        assert got == expected
        assert seconds < 1e-3, f"{text}: {seconds * 1e3:.3f} ms"


@pytest.mark.criterion(2, "copy language from the oracle and the PMCFG")
def test_criterion_2_copy_language():
    start = time.perf_counter()
    r = parse_valid(COPY)
    oracle = lang_until_saturated(r, 6)
    grammar_words = bounded_language(build_pmcfg(r), 6)
    elapsed = time.perf_counter() - start
    expected = {w + w for w in all_words("ab", 3)}
    assert len(expected) == 15
    assert oracle.saturated and oracle.words == expected
    assert grammar_words == expected
    assert elapsed < 1.0


@pytest.mark.criterion(3, "PMCFG rule shape and functional dereferencing trace")
def test_criterion_3_pmcfg_example():
    start = time.perf_counter()
    c = construct_pmcfg(parse_valid(NOT_CLOSED_STAR))
    trace = functional_deref_trace(c, parse_refstring("[1 a ]1 c #1"))
    elapsed = time.perf_counter() - start
    assert len(c.grammar.rules) == len(EXPECTED_RULES)
    assert same_up_to_renaming(c.grammar, EXPECTED_RULES, EXPECTED_BODIES)
    assert trace[-1] == ("aca", "a")
    assert elapsed < 1.0


@pytest.mark.criterion(4, "language of (_1a*)_1(c\\1)* up to length 9")
def test_criterion_4_repeated_block_language():
    r = parse_valid(NOT_CLOSED_STAR)
    expected = set()
    for n in range(10):
        w = "a" * n
        k = 0
        while len(w) + k * (1 + len(w)) <= 9:
            expected.add(w + ("c" + w) * k)
            k += 1
    oracle = lang_until_saturated(r, 9)
    assert oracle.saturated
    assert oracle.words == expected
    assert bounded_language(build_pmcfg(r), 9) == expected
    # no finite counter bound exists: the fixpoint keeps growing
    nfa = build_nfa(r)
    with pytest.raises(BoundsDiverged):
        compute_bounds(nfa, open_sets(nfa), 64)


@pytest.mark.criterion(5, "t/s counters of the worked ref-word")
def test_criterion_5_counters():
    v = parse_refstring("[1 a a ]1 [2 #1 #1 ]2 [1 #2 ]1 #1")
    t, s = ts_sequence(v, 2)[5]
    assert t[0] == 2
    assert s[0] == 3


@pytest.mark.criterion(6, "bounds and MCFG for ((_1a*)_1(_2\\1)_2\\2\\2)*")
def test_criterion_6_nested_example():
    start = time.perf_counter()
    r = parse_valid(NESTED)
    nfa = build_nfa(r)
    bounds = compute_bounds(nfa, open_sets(nfa), 64, max_group_index(r))
    grammar = build_mcfg(r)
    words = bounded_language(grammar, 8)
    oracle = lang_until_saturated(r, 8)
    elapsed = time.perf_counter() - start
    assert (bounds.theta, bounds.sigma, bounds.rho) == (2, 2, 10)
    assert is_nonduplicating(grammar) and is_unary(grammar)
    assert "aaaa" in words
    assert oracle.saturated and words == oracle.words
    assert elapsed < 30.0


@pytest.mark.criterion(7, "closedness classification table")
def test_criterion_7_classification():
    for text in (r"(_1a*)_1c\1", r"((_1a*)_1c\1)*", r"\1+(_1a*)_1c\1"):
        assert is_closed_star(parse_valid(text)), text
    assert not is_closed_star(parse_valid(NOT_CLOSED_STAR))
    assert is_closed(parse_valid(r"(_1a*)_1\1"))
    assert not is_closed(parse_valid(r"(_1a*)_1\2"))
    assert not is_closed(parse_valid(r"\1"))


@pytest.mark.criterion(8, "cross-engine agreement on the shipped corpus at length 7")
def test_criterion_8_corpus():
    entries = corpus_entries()
    texts = [e.rewb for e in entries]
    assert len(entries) >= 20
    assert all(example in texts for example in WORKED_EXAMPLES)
    assert all(max_group_index(parse_valid(t)) <= 2 for t in texts)
    start = time.perf_counter()
    summary = run_corpus(entries, max_len=7)
    elapsed = time.perf_counter() - start
    failures = [(e["line"], e["rewb"], e["problems"]) for e in summary["entries"] if not e["ok"]]
    assert failures == []
    closed_star = 0
    for entry in summary["entries"]:
        engines = set(entry["check"]["engines"])
        if entry["classification"]["closed_star"] == "yes":
            closed_star += 1
            assert engines == {"oracle", "pmcfg", "mcfg", "nesa"}
        else:
            assert {"oracle", "pmcfg"} <= engines
    assert closed_star >= 10
    assert elapsed < 300.0


def _random_refstring(rng, max_index=3, max_len=14):
    makers = [lambda: letter(rng.choice("ab")), lambda: open_(rng.randint(1, max_index)),
              lambda: close(rng.randint(1, max_index)), lambda: num(rng.randint(1, max_index))]
    return tuple(rng.choice(makers)() for _ in range(rng.randint(0, max_len)))


def _memory_law_holds(v):
    for cut in range(len(v)):
        before, c = v[:cut], v[cut]
        opened = open_set(before)
        for i in range(1, 4):
            old = mem(i, before)
            if c.kind == OPEN and c.arg == i:
                expected = ""
            elif c.kind == LETTER and i in opened:
                expected = old + c.arg
            elif c.kind == NUM and i in opened:
                expected = old + mem(c.arg, before)
            else:
                expected = old
            if mem(i, v[:cut + 1]) != expected:
                return False
    return True


@pytest.mark.criterion(9, "invariant suite")
def test_criterion_9_invariants():
    start = time.perf_counter()
    rng = random.Random(20240517)
    samples = [_random_refstring(rng) for _ in range(1000)]
    assert all(_memory_law_holds(v) for v in samples)

    checked = 0
    for entry in corpus_entries():
        r = parse_valid(entry.rewb)
        words = ref_enumerate(r, 10)
        pmcfg = construct_pmcfg(r)
        for v in words:
            assert open_set(v) == frozenset() and is_matching(v), (entry.rewb, v)
            for run in pmcfg.nfa.runs(v):
                for i, value in enumerate(functional_deref_trace(pmcfg, v, run)):
                    prefix = v[:i]
                    assert value == (deref(prefix),) + tuple(
                        mem(k, prefix) for k in range(1, pmcfg.kappa + 1)), (entry.rewb, v, i)
            checked += 1
        if not is_closed_star(r):
            continue
        mcfg = construct_mcfg(r)
        nesa = build_nesa(r)
        assert nonerasing_audit(nesa) == [], entry.rewb
        for v in words:
            for run in mcfg.nfa.runs(v):
                assert check_valid_copies(mcfg, v, mcfg_block_trace(mcfg, v, run)) == [], (entry.rewb, v)
            w = deref(v)
            trace = run_word(nesa, v, w)  # raises if any big step has two successors
            assert nesa.is_accepting(trace[-1], w)
    assert checked > 1000
    assert time.perf_counter() - start < 120.0
