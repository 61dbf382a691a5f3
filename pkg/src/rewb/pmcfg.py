"""Unary PMCFG equivalent to an arbitrary rewb.

Tuples are ``(x, y_1, ..., y_kappa)``: ``x`` accumulates the dereferenced
word and ``y_k`` holds memory cell ``k``. Every NFA edge ``q -c-> q'`` becomes
a rule ``A_q' -> phi_c[A_q]``, so a derivation guesses an accepting run
backwards and the functions replay it forwards.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .grammar import ConcatFunction, Grammar, Pattern, Rule, StrTuple, evaluate
from .nfa import Edge, ExtNfa, build_nfa, open_sets
from .refstring import LETTER, NUM, OPEN, RefString, Sym
from .syntax import Rewb, max_group_index


def cell_set_name(cells: frozenset[int]) -> str:
    return "M" + "-".join(str(j) for j in sorted(cells))


def nonterminal(q: int) -> str:
    return f"A{q}"


@dataclass
class PmcfgConstruction:
    grammar: Grammar
    nfa: ExtNfa
    open_table: dict[int, frozenset[int]]
    kappa: int
    edge_function: dict[Edge, str]

    def check_run(self, v: RefString, run: Sequence[int]) -> None:
        if len(run) != len(v) + 1 or run[0] != self.nfa.start:
            raise ValueError("run does not match the ref-word")
        for i, sym in enumerate(v):
            if (run[i], sym, run[i + 1]) not in self.edge_function:
                raise ValueError(f"no edge {run[i]} -{sym}-> {run[i + 1]}")


def _function_for(sym: Sym, cells: frozenset[int], kappa: int) -> ConcatFunction:
    x = (1, 1)

    def y(j: int) -> tuple[int, int]:
        return (1, j + 1)

    dims = (kappa + 1,)
    if sym.kind == LETTER:
        a = str(sym.arg)
        body: list[Pattern] = [(x, a)]
        body += [(y(j), a) if j in cells else (y(j),) for j in range(1, kappa + 1)]
        return ConcatFunction(f"in_{a}.{cell_set_name(cells)}", dims, tuple(body))
    if sym.kind == NUM:
        k = int(sym.arg)
        body = [(x, y(k))]
        body += [(y(j), y(k)) if j in cells else (y(j),) for j in range(1, kappa + 1)]
        return ConcatFunction(f"paste_{k}.{cell_set_name(cells)}", dims, tuple(body))
    if sym.kind == OPEN:
        k = int(sym.arg)
        body = [(x,)] + [() if j == k else (y(j),) for j in range(1, kappa + 1)]
        return ConcatFunction(f"reset_{k}", dims, tuple(body))
    return identity(kappa + 1)


def identity(dim: int) -> ConcatFunction:
    return ConcatFunction("id", (dim,), tuple(((1, j),) for j in range(1, dim + 1)))


def output(dim: int) -> ConcatFunction:
    return ConcatFunction("out", (dim,), (((1, 1),),))


def initial(dim: int) -> ConcatFunction:
    return ConcatFunction("init", (), tuple(() for _ in range(dim)))


def construct_pmcfg(r: Rewb) -> PmcfgConstruction:
    kappa = max_group_index(r)
    nfa = build_nfa(r)
    table = open_sets(nfa)
    dim = kappa + 1
    functions: dict[str, ConcatFunction] = {}
    rules: list[Rule] = []
    edge_function: dict[Edge, str] = {}

    def register(f: ConcatFunction) -> str:
        functions.setdefault(f.name, f)
        return f.name

    dims = {"S": 1}
    dims.update((nonterminal(q), dim) for q in range(nfa.num_states))
    for f in sorted(nfa.finals):
        rules.append(Rule("S", register(output(dim)), (nonterminal(f),)))
    for src, sym, dst in nfa.edges:
        name = register(_function_for(sym, table[dst], kappa))
        edge_function[(src, sym, dst)] = name
        rules.append(Rule(nonterminal(dst), name, (nonterminal(src),)))
    rules.append(Rule(nonterminal(nfa.start), register(initial(dim))))
    grammar = Grammar("S", dims, functions, rules, "pmcfg")
    return PmcfgConstruction(grammar, nfa, table, kappa, edge_function)


def build_pmcfg(r: Rewb) -> Grammar:
    return construct_pmcfg(r).grammar


def functional_deref_trace(c: PmcfgConstruction, v: RefString,
                           run: Sequence[int] | None = None) -> list[StrTuple]:
    """Tuples after each prefix of ``v`` when its edge functions are replayed."""
    if run is None:
        runs = c.nfa.runs(v)
        if not runs:
            raise ValueError("ref-word is not accepted")
        run = runs[0]
    c.check_run(v, run)
    dim = c.kappa + 1
    current: StrTuple = evaluate(initial(dim), ())
    out = [current]
    for i, sym in enumerate(v):
        f = c.grammar.functions[c.edge_function[(run[i], sym, run[i + 1])]]
        current = evaluate(f, (current,))
        out.append(current)
    return out
