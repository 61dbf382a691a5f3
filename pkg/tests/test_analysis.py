import pytest
from hypothesis import given, settings

from conftest import NESTED, NOT_CLOSED_STAR, valid_rewbs
from rewb.analysis import (
    BoundsDiverged, analyse, capt, compute_bounds, depths, is_closed, is_closed_star, ts_sequence,
)
from rewb.nfa import build_nfa, open_sets
from rewb.refstring import NUM, OPEN, mem, parse_refstring
from rewb.syntax import parse_valid


def bounds_of(text, cap=64):
    nfa = build_nfa(parse_valid(text))
    return compute_bounds(nfa, open_sets(nfa), cap)


class TestCapt:
    @pytest.mark.parametrize("text, expected", [
        (r"(_1a)_1", {1}),
        (r"(_1a)_1+(_2b)_2", set()),
        (r"(_1a)_1(_2b)_2+(_1c)_1", {1}),
        (r"((_1a)_1)*", set()),
        (r"(_2(_1a)_1)_2", {1, 2}),
    ])
    def test_examples(self, text, expected):
        assert capt(parse_valid(text)) == expected

    def test_star_guarantees_nothing(self):
        # zero iterations of the star leave cell 1 unset when \1 is reached
        r = parse_valid(r"(((_1a)_1)*\1)*")
        assert not is_closed(parse_valid(r"((_1a)_1)*\1"))
        assert not is_closed_star(r)


class TestClassification:
    @pytest.mark.parametrize("text, closed, closed_star", [
        (r"(_1a*)_1c\1", True, True),
        (r"((_1a*)_1c\1)*", True, True),
        (r"\1+(_1a*)_1c\1", False, True),
        (NOT_CLOSED_STAR, True, False),
        (r"(_1a*)_1\1", True, True),
        (r"(_1a*)_1\2", False, True),
        (r"\1", False, True),
        (NESTED, True, True),
        (r"(_1a*)_1(\1(_1b*)_1)*", True, False),
    ])
    def test_table(self, text, closed, closed_star):
        r = parse_valid(text)
        assert is_closed(r) is closed
        assert is_closed_star(r) is closed_star

    def test_bound_argument(self):
        assert is_closed(parse_valid(r"\1"), {1})


class TestCounters:
    def test_worked_example(self):
        v = parse_refstring("[1 a a ]1 [2 #1 #1 ]2 [1 #2 ]1 #1")
        seq = ts_sequence(v, 2)
        assert len(seq) == len(v) + 1
        t5, s5 = seq[5]
        assert (t5[0], s5[0]) == (2, 3)
        assert seq[0] == ((0, 0), (0, 0)) and seq[-1] == ((0, 0), (0, 0))

    @settings(max_examples=300)
    @given(valid_rewbs(max_index=2))
    def test_t_counts_direct_references(self, r):
        """t at a position counts later #k up to the next [k."""
        from rewb.refstring import ref_enumerate
        for v in ref_enumerate(r, 7):
            for i, (t, _) in enumerate(ts_sequence(v, 2)):
                for k in (1, 2):
                    count = 0
                    for s in v[i:]:
                        if s == (OPEN, k):
                            break
                        count += s == (NUM, k)
                    assert t[k - 1] == count


class TestBounds:
    def test_nested_example(self):
        b = bounds_of(NESTED)
        assert (b.theta, b.sigma, b.rho) == (2, 2, 10)
        assert b.depth == (0, 2, 10)
        assert b.report()["reachable_count"] == 7

    @pytest.mark.parametrize("text, theta, sigma, rho", [
        (r"(_1a*)_1c\1", 1, 1, 1),
        (r"((_1a*)_1c\1)*", 1, 1, 1),
        (r"(_1(a+b)*)_1\1", 1, 1, 1),
        (r"(a+b)*c", 0, 0, 0),
    ])
    def test_small(self, text, theta, sigma, rho):
        b = bounds_of(text)
        assert (b.theta, b.sigma, b.rho) == (theta, sigma, rho)

    def test_depths(self):
        assert depths(2, 2, 2) == [0, 2, 10]
        assert depths(3, 1, 3) == [0, 3, 12, 39]

    def test_divergence_on_loop_reference(self):
        with pytest.raises(BoundsDiverged) as info:
            bounds_of(NOT_CLOSED_STAR, cap=16)
        report = info.value.report()
        assert report["diverged"] and report["cell"] == 1
        assert report["witness_cycle"] == ["3-#1->2", "2-c->3"]

    def test_analyse(self):
        info = analyse(parse_valid(NESTED))
        assert info["closed_star"] and info["bounds"]["rho"] == 10

    @settings(max_examples=150, deadline=None)
    @given(valid_rewbs(max_index=2))
    def test_closed_star_bounds_converge(self, r):
        if not is_closed_star(r):
            return
        from rewb.refstring import ref_enumerate
        nfa = build_nfa(r)
        b = compute_bounds(nfa, open_sets(nfa), 64, 2)
        for v in ref_enumerate(r, 8):
            for t, s in ts_sequence(v, 2):
                assert max(t) <= b.theta and max(s) <= b.sigma


def test_mem_is_what_references_copy():
    v = parse_refstring("[1 a ]1 [2 #1 ]2")
    assert mem(2, v) == "a"
