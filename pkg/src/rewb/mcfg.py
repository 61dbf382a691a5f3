"""Unary MCFG equivalent to a closed-star rewb.

Each memory cell ``k`` becomes a block of ``rho`` copies
``y[k][1..rho]``. A reference to cell ``k`` consumes copies instead of
duplicating the cell, so no function uses an argument component twice.
The block layout is driven by the t/s counters: at a position where cell
``k`` still has ``t`` direct uses and depth ``s``, its first
``(t / theta) * depth[s]`` copies hold the cell content.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .analysis import DEFAULT_CAP, Bounds, compute_bounds, is_closed_star, s_step, t_step, ts_sequence
from .grammar import ConcatFunction, Grammar, Pattern, Rule, StrTuple, evaluate
from .nfa import ExtNfa, build_nfa, open_sets
from .pmcfg import cell_set_name
from .refstring import LETTER, NUM, OPEN, RefString, Sym, mem
from .syntax import Rewb, max_group_index

Triple = tuple[int, tuple[int, ...], tuple[int, ...]]


class NotClosedStar(ValueError):
    pass


def _vec(values: Sequence[int]) -> str:
    return "-".join(str(x) for x in values)


def nonterminal(triple: Triple) -> str:
    q, tau, sigma = triple
    return f"A{q}.t{_vec(tau)}.s{_vec(sigma)}"


@dataclass
class McfgConstruction:
    grammar: Grammar
    nfa: ExtNfa
    open_table: dict[int, frozenset[int]]
    bounds: Bounds
    kappa: int
    # (source triple, symbol, target triple) -> function name
    edge_function: dict[tuple[Triple, Sym, Triple], str]

    @property
    def rho(self) -> int:
        return self.bounds.rho

    @property
    def dim(self) -> int:
        return 1 + self.kappa * self.rho

    def component(self, k: int, r: int) -> int:
        """1-based tuple position of copy ``r`` of cell ``k``."""
        return 1 + (k - 1) * self.rho + r

    def block(self, value: StrTuple, k: int) -> StrTuple:
        lo = self.component(k, 1) - 1
        return value[lo:lo + self.rho]

    def valid_copies(self, k: int, t: int, s: int) -> int:
        theta = self.bounds.theta
        if t == 0:
            return 0
        span = t * self.bounds.depth[s]
        if span % theta:
            raise ArithmeticError(f"{t} * depth[{s}] is not divisible by theta={theta}")
        return span // theta


class _Builder:
    def __init__(self, kappa: int, bounds: Bounds):
        self.kappa = kappa
        self.bounds = bounds
        self.rho = bounds.rho
        self.dim = 1 + kappa * self.rho

    def y(self, k: int, r: int) -> tuple[int, int]:
        return (1, 1 + (k - 1) * self.rho + r)

    def cells(self) -> range:
        return range(1, self.kappa + 1)

    def copies(self) -> range:
        return range(1, self.rho + 1)

    def input(self, a: str, cells: frozenset[int]) -> ConcatFunction:
        body: list[Pattern] = [((1, 1), a)]
        for j in self.cells():
            for r in self.copies():
                body.append((self.y(j, r), a) if j in cells else (self.y(j, r),))
        return ConcatFunction(f"in_{a}.{cell_set_name(cells)}", (self.dim,), tuple(body))

    def reset(self, k: int) -> ConcatFunction:
        body: list[Pattern] = [((1, 1),)]
        for j in self.cells():
            for r in self.copies():
                body.append(() if j == k else (self.y(j, r),))
        return ConcatFunction(f"reset_{k}", (self.dim,), tuple(body))

    def identity(self) -> ConcatFunction:
        return ConcatFunction("id", (self.dim,), tuple(((1, p),) for p in range(1, self.dim + 1)))

    def paste(self, k: int, cells: frozenset[int], tau: tuple[int, ...], sigma: tuple[int, ...]) -> ConcatFunction:
        theta, depth = self.bounds.theta, self.bounds.depth
        t_k, s_k = tau[k - 1], sigma[k - 1]
        if t_k < 1 or s_k < 1:
            raise ArithmeticError(f"paste for cell {k} needs positive counters, got t={t_k} s={s_k}")
        offset = (t_k - 1) * depth[s_k]
        if offset % theta:
            raise ArithmeticError(f"({t_k}-1) * depth[{s_k}] is not divisible by theta={theta}")
        width = depth[s_k - 1]

        def psi(j: int) -> int:
            return offset // theta + 1 + j * width

        body: list[Pattern] = [((1, 1), self.y(k, psi(0)))]
        for j in self.cells():
            for r in self.copies():
                if j == k:
                    body.append((self.y(j, r),) if r < psi(0) else ())
                elif j in cells:
                    body.append((self.y(j, r), self.y(k, psi(j - 1) + r)) if r <= width else ())
                else:
                    body.append((self.y(j, r),))
        name = f"paste_{k}.{cell_set_name(cells)}.t{_vec(tau)}.s{_vec(sigma)}"
        return ConcatFunction(name, (self.dim,), tuple(body))

    def function_for(self, sym: Sym, cells: frozenset[int], tau, sigma) -> ConcatFunction:
        if sym.kind == LETTER:
            return self.input(str(sym.arg), cells)
        if sym.kind == NUM:
            return self.paste(int(sym.arg), cells, tau, sigma)
        if sym.kind == OPEN:
            return self.reset(int(sym.arg))
        return self.identity()


def construct_mcfg(r: Rewb, cap: int = DEFAULT_CAP) -> McfgConstruction:
    if not is_closed_star(r):
        raise NotClosedStar("rewb is not closed-star")
    kappa = max_group_index(r)
    nfa = build_nfa(r)
    table = open_sets(nfa)
    bounds = compute_bounds(nfa, table, cap, kappa)
    b = _Builder(kappa, bounds)

    functions: dict[str, ConcatFunction] = {}
    rules: list[Rule] = []
    edge_function: dict[tuple[Triple, Sym, Triple], str] = {}

    def register(f: ConcatFunction) -> str:
        functions.setdefault(f.name, f)
        return f.name

    reachable = sorted(bounds.reachable)
    dims = {"S": 1}
    dims.update((nonterminal(tr), b.dim) for tr in reachable)
    zero = (0,) * kappa
    out = ConcatFunction("out", (b.dim,), (((1, 1),),))
    for f in sorted(nfa.finals):
        rules.append(Rule("S", register(out), (nonterminal((f, zero, zero)),)))
    for target in reachable:
        q, tau_after, sigma_after = target
        for src, sym in sorted(nfa.in_edges[q], key=lambda e: (e[0], str(e[1]))):
            tau = t_step(tau_after, sym)
            sigma = s_step(sigma_after, sym, table[q])
            source = (src, tau, sigma)
            name = register(b.function_for(sym, table[q], tau, sigma))
            edge_function[(source, sym, target)] = name
            rules.append(Rule(nonterminal(target), name, (nonterminal(source),)))
    init = ConcatFunction("init", (), tuple(() for _ in range(b.dim)))
    for triple in reachable:
        if triple[0] == nfa.start:
            rules.append(Rule(nonterminal(triple), register(init)))
    grammar = Grammar("S", dims, functions, rules, "mcfg")
    return McfgConstruction(grammar, nfa, table, bounds, kappa, edge_function)


def build_mcfg(r: Rewb, cap: int = DEFAULT_CAP) -> Grammar:
    return construct_mcfg(r, cap).grammar


def mcfg_block_trace(c: McfgConstruction, v: RefString,
                     run: Sequence[int] | None = None) -> list[StrTuple]:
    """Tuples after each prefix of ``v`` (a full member of the ref-language)."""
    if run is None:
        runs = c.nfa.runs(v)
        if not runs:
            raise ValueError("ref-word is not accepted")
        run = runs[0]
    if len(run) != len(v) + 1 or run[0] != c.nfa.start or run[-1] not in c.nfa.finals:
        raise ValueError("run does not match the ref-word")
    ts = ts_sequence(v, c.kappa)
    current: StrTuple = ("",) * c.dim
    out = [current]
    for i, sym in enumerate(v):
        source = (run[i], *ts[i])
        target = (run[i + 1], *ts[i + 1])
        key = (source, sym, target)
        if key not in c.edge_function:
            raise ValueError(f"no rule for {run[i]} -{sym}-> {run[i + 1]} at position {i}")
        current = evaluate(c.grammar.functions[c.edge_function[key]], (current,))
        out.append(current)
    return out


def check_valid_copies(c: McfgConstruction, v: RefString, trace: Sequence[StrTuple]) -> list[str]:
    """Positions where a valid copy of some cell differs from its memory content."""
    problems = []
    ts = ts_sequence(v, c.kappa)
    for i, value in enumerate(trace):
        t, s = ts[i]
        for k in range(1, c.kappa + 1):
            want = mem(k, v[:i])
            count = c.valid_copies(k, t[k - 1], s[k - 1])
            block = c.block(value, k)
            for r in range(count):
                if block[r] != want:
                    problems.append(f"position {i}, cell {k}, copy {r + 1}: {block[r]!r} != {want!r}")
    return problems
