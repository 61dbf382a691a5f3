import pytest
from hypothesis import given, settings

from conftest import COPY, EXPECTED_BODIES, EXPECTED_RULES, NOT_CLOSED_STAR, same_up_to_renaming, valid_rewbs
from rewb.grammar import bounded_language, generate, has_monotone_certificate, is_unary
from rewb.pmcfg import build_pmcfg, construct_pmcfg, functional_deref_trace
from rewb.refstring import deref, lang_oracle, mem, parse_refstring, ref_enumerate
from rewb.syntax import parse_valid


class TestWorkedExample:
    def test_rule_shape(self):
        g = build_pmcfg(parse_valid(NOT_CLOSED_STAR))
        assert len(g.rules) == len(EXPECTED_RULES)
        assert same_up_to_renaming(g, EXPECTED_RULES, EXPECTED_BODIES)

    def test_function_names(self):
        g = build_pmcfg(parse_valid(NOT_CLOSED_STAR))
        assert set(g.functions) == {"out", "in_a.M1", "in_c.M", "paste_1.M", "reset_1", "id", "init"}

    def test_trace(self):
        c = construct_pmcfg(parse_valid(NOT_CLOSED_STAR))
        trace = functional_deref_trace(c, parse_refstring("[1 a ]1 c #1"))
        assert trace == [("", ""), ("", ""), ("a", "a"), ("a", "a"), ("ac", "a"), ("aca", "a")]

    def test_trace_rejects_non_members(self):
        c = construct_pmcfg(parse_valid(NOT_CLOSED_STAR))
        with pytest.raises(ValueError):
            functional_deref_trace(c, parse_refstring("[1 a ]1 c"))

    def test_explicit_bad_run(self):
        c = construct_pmcfg(parse_valid(NOT_CLOSED_STAR))
        with pytest.raises(ValueError):
            functional_deref_trace(c, parse_refstring("[1 ]1"), run=(0, 1, 3))


def test_copy_language():
    g = build_pmcfg(parse_valid(COPY))
    assert is_unary(g) and has_monotone_certificate(g)
    assert len(bounded_language(g, 6)) == 15


@settings(max_examples=100, deadline=None)
@given(valid_rewbs())
def test_prefix_tuples_follow_the_memory(r):
    c = construct_pmcfg(r)
    for v in ref_enumerate(r, 8):
        for run in c.nfa.runs(v):
            for i, value in enumerate(functional_deref_trace(c, v, run)):
                prefix = v[:i]
                assert value == (deref(prefix),) + tuple(mem(k, prefix) for k in range(1, c.kappa + 1))


@settings(max_examples=100, deadline=None)
@given(valid_rewbs())
def test_language_matches_oracle(r):
    gen = generate(build_pmcfg(r), 5)
    assert gen.exact
    oracle = lang_oracle(r, 5, 40)
    if oracle.saturated:
        assert gen.words == oracle.words
    else:
        assert oracle.words <= gen.words
