import pytest
from hypothesis import given, settings

from conftest import NESTED, NOT_CLOSED_STAR, valid_rewbs
from rewb.nfa import (
    ExtNfa, InconsistentOpenSets, NfaConditionError, build_nfa, check_conditions, dump, nfa_enumerate,
    open_sets,
)
from rewb.refstring import close, letter, open_, open_set, parse_refstring, ref_enumerate
from rewb.syntax import parse_valid


def edges_text(nfa):
    return [f"{s} -{c}-> {d}" for s, c, d in nfa.edges]


class TestWorkedExamples:
    def test_star_of_reference(self):
        nfa = build_nfa(parse_valid(NOT_CLOSED_STAR))
        assert nfa.num_states == 4
        assert nfa.start == 0 and nfa.finals == {2}
        assert edges_text(nfa) == ["0 -[1-> 1", "1 -a-> 1", "1 -]1-> 2", "2 -c-> 3", "3 -#1-> 2"]
        assert open_sets(nfa) == {0: frozenset(), 1: {1}, 2: frozenset(), 3: frozenset()}

    def test_nested_groups_under_star(self):
        nfa = build_nfa(parse_valid(NESTED))
        assert nfa.num_states == 7
        assert nfa.finals == {0}
        assert edges_text(nfa) == [
            "0 -[1-> 1", "1 -a-> 1", "1 -]1-> 2", "2 -[2-> 3",
            "3 -#1-> 4", "4 -]2-> 5", "5 -#2-> 6", "6 -#2-> 0",
        ]
        table = open_sets(nfa)
        assert table[3] == {2} and table[4] == {2} and table[5] == frozenset()

    def test_dump(self):
        text = dump(build_nfa(parse_valid(NOT_CLOSED_STAR)), None)
        assert text.splitlines()[:3] == ["states 4", "start 0", "finals 2"]
        assert "open" not in text


class TestConditions:
    def test_unreachable_state(self):
        nfa = ExtNfa(3, 0, frozenset({1}), ((0, letter("a"), 1), (2, letter("a"), 1)))
        with pytest.raises(NfaConditionError, match="unreachable"):
            check_conditions(nfa)

    def test_parallel_bracket_edge(self):
        nfa = ExtNfa(2, 0, frozenset({1}), ((0, letter("a"), 1), (0, open_(1), 1)))
        with pytest.raises(NfaConditionError, match="parallel"):
            check_conditions(nfa)

    def test_inconsistent_open_sets(self):
        nfa = ExtNfa(2, 0, frozenset({1}), ((0, letter("a"), 1), (0, open_(1), 1), (1, close(1), 1)))
        with pytest.raises(InconsistentOpenSets):
            open_sets(nfa)


def test_runs():
    nfa = build_nfa(parse_valid(NOT_CLOSED_STAR))
    assert nfa.runs(parse_refstring("[1 a ]1 c #1")) == [(0, 1, 1, 2, 3, 2)]
    assert nfa.runs(parse_refstring("[1 a ]1 c")) == []
    assert nfa.accepts(parse_refstring("[1 ]1"))


@settings(max_examples=150, deadline=None)
@given(valid_rewbs(max_index=2, letters="ab"))
def test_nfa_recognises_the_ref_language(r):
    nfa = build_nfa(r)
    check_conditions(nfa)
    assert set(nfa_enumerate(nfa, 7)) == set(ref_enumerate(r, 7))


@settings(max_examples=150, deadline=None)
@given(valid_rewbs(max_index=2, letters="ab"))
def test_open_table_matches_every_path(r):
    nfa = build_nfa(r)
    table = open_sets(nfa)
    layer = {(nfa.start, ())}
    for _ in range(6):
        for q, v in layer:
            assert table[q] == open_set(v)
        layer = {(d, v + (c,)) for q, v in layer for c, d in nfa.out_edges[q]}
