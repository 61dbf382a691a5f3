from __future__ import annotations

import random
from itertools import permutations
from pathlib import Path

import pytest
from hypothesis import strategies as st

from rewb.harness import load_corpus, random_rewb
from rewb.refstring import Sym, close, letter, num, open_
from rewb.syntax import Alt, Concat, Epsilon, Group, Ref, Star, Terminal, parse_valid

ROOT = Path(__file__).resolve().parent.parent
CORPUS_PATH = ROOT / "corpus" / "rewbs.txt"

COPY = r"(_1(a+b)*)_1\1"
NOT_CLOSED_STAR = r"(_1a*)_1(c\1)*"
NESTED = r"((_1a*)_1(_2\1)_2\2\2)*"


# the grammar for (_1a*)_1(c\1)* written out by hand, with cells (x, y1)
EXPECTED_RULES = {
    ("S", "out", ("A2",)),
    ("A3", "in_c", ("A2",)),
    ("A2", "paste_1", ("A3",)),
    ("A2", "id", ("A1",)),
    ("A1", "in_a", ("A1",)),
    ("A1", "reset_1", ("A0",)),
    ("A0", "init", ()),
}
EXPECTED_BODIES = {
    "out": (((1, 1),),),
    "in_a": (((1, 1), "a"), ((1, 2), "a")),
    "in_c": (((1, 1), "c"), ((1, 2),)),
    "paste_1": (((1, 1), (1, 2)), ((1, 2),)),
    "reset_1": (((1, 1),), ()),
    "id": (((1, 1),), ((1, 2),)),
    "init": ((), ()),
}


def rule_shape(grammar):
    """Rules as (lhs, function body, args); function names are ignored."""
    shapes = set()
    for rule in grammar.rules:
        f = grammar.functions[rule.fun]
        shapes.add((rule.lhs, f.body, rule.args))
    return shapes


def same_up_to_renaming(grammar, rules, bodies):
    want = {(lhs, bodies[fun], args) for lhs, fun, args in rules}
    got = rule_shape(grammar)
    states = sorted(n for n in grammar.dims if n != "S")
    for perm in permutations(states):
        rename = dict(zip(states, perm), S="S")
        if {(rename[l], b, tuple(rename[a] for a in args)) for l, b, args in got} == want:
            return True
    return False


def corpus_entries():
    return load_corpus(CORPUS_PATH)


def corpus_texts(closed_star_only: bool = False) -> list[str]:
    from rewb.analysis import is_closed_star

    texts = [e.rewb for e in corpus_entries()]
    if closed_star_only:
        texts = [t for t in texts if is_closed_star(parse_valid(t))]
    return texts


@pytest.fixture(scope="session")
def corpus():
    return corpus_entries()


# -- hypothesis strategies ---------------------------------------------------------

def any_asts(max_index: int = 3):
    """Arbitrary ASTs, valid or not."""
    leaves = st.one_of(
        st.sampled_from("abc").map(Terminal),
        st.just(Epsilon()),
        st.integers(1, max_index).map(Ref),
    )

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda p: Concat(*p)),
            st.tuples(children, children).map(lambda p: Alt(*p)),
            children.map(Star),
            st.tuples(st.integers(1, max_index), children).map(lambda p: Group(*p)),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@st.composite
def valid_rewbs(draw, max_index: int = 2, letters: str = "ab", max_size: int = 9):
    seed = draw(st.integers(0, 2**32 - 1))
    size = draw(st.integers(3, max_size))
    return random_rewb(random.Random(seed), max_index, letters, size)


def symbols(max_index: int = 3):
    idx = st.integers(1, max_index)
    return st.one_of(
        st.sampled_from("ab").map(letter),
        idx.map(open_),
        idx.map(close),
        idx.map(num),
    )


def refstrings(max_index: int = 3, max_size: int = 14):
    return st.lists(symbols(max_index), max_size=max_size).map(tuple)


def kinds(v: tuple[Sym, ...]) -> str:
    return " ".join(str(s) for s in v)


# -- acceptance report ----------------------------------------------------------------

_CRITERIA: dict[int, tuple[str, bool, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.skipped:
        return
    number, title = marker.args
    if report.when == "call" or report.failed:
        _CRITERIA[number] = (title, report.passed, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, seconds = _CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {title}  ({seconds:.3f}s)")
