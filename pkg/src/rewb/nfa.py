"""Epsilon-free NFAs over the extended alphabet recognising ref-languages.

Built by a Thompson translation, epsilon elimination onto the targets of
symbol edges, trimming, and a merge of states with identical futures. The
result has no epsilon edges, every state is useful, and no bracket edge runs
parallel to another edge between the same pair of states.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .refstring import CLOSE, LETTER, NUM, OPEN, RefString, Sym, close, letter, num, open_
from .syntax import Alt, Concat, Epsilon, Group, Ref, Rewb, Star, Terminal

Edge = tuple[int, Sym, int]

_KIND_ORDER = {LETTER: 0, OPEN: 1, CLOSE: 2, NUM: 3}


def sym_key(s: Sym) -> tuple:
    return (_KIND_ORDER[s.kind], str(s.arg) if s.kind == LETTER else s.arg)


class InconsistentOpenSets(RuntimeError):
    pass


@dataclass(frozen=True)
class ExtNfa:
    num_states: int
    start: int
    finals: frozenset[int]
    edges: tuple[Edge, ...]

    @cached_property
    def out_edges(self) -> dict[int, list[tuple[Sym, int]]]:
        out: dict[int, list[tuple[Sym, int]]] = {q: [] for q in range(self.num_states)}
        for src, sym, dst in self.edges:
            out[src].append((sym, dst))
        return out

    @cached_property
    def in_edges(self) -> dict[int, list[tuple[int, Sym]]]:
        inc: dict[int, list[tuple[int, Sym]]] = {q: [] for q in range(self.num_states)}
        for src, sym, dst in self.edges:
            inc[dst].append((src, sym))
        return inc

    @property
    def kappa(self) -> int:
        return max((s.arg for _, s, _ in self.edges if s.kind != LETTER), default=0)  # type: ignore[type-var]

    def accepts(self, v: Iterable[Sym]) -> bool:
        current = {self.start}
        for s in v:
            current = {dst for q in current for sym, dst in self.out_edges[q] if sym == s}
            if not current:
                return False
        return bool(current & self.finals)

    def runs(self, v: RefString) -> list[tuple[int, ...]]:
        """All accepting state sequences for ``v`` (length ``len(v) + 1``)."""
        paths: list[tuple[int, ...]] = [(self.start,)]
        for s in v:
            paths = [p + (dst,) for p in paths for sym, dst in self.out_edges[p[-1]] if sym == s]
        return [p for p in paths if p[-1] in self.finals]


# -- construction ------------------------------------------------------------

class _Thompson:
    def __init__(self) -> None:
        self.count = 0
        self.eps: dict[int, list[int]] = {}
        self.sym: dict[int, list[tuple[Sym, int]]] = {}

    def state(self) -> int:
        q = self.count
        self.count += 1
        self.eps[q] = []
        self.sym[q] = []
        return q

    def build(self, r: Rewb) -> tuple[int, int]:
        if isinstance(r, (Terminal, Ref)):
            s, t = self.state(), self.state()
            self.sym[s].append((letter(r.letter) if isinstance(r, Terminal) else num(r.index), t))
            return s, t
        if isinstance(r, Epsilon):
            s, t = self.state(), self.state()
            self.eps[s].append(t)
            return s, t
        if isinstance(r, Concat):
            s1, t1 = self.build(r.left)
            s2, t2 = self.build(r.right)
            self.eps[t1].append(s2)
            return s1, t2
        if isinstance(r, Alt):
            s, t = self.state(), self.state()
            for part in (r.left, r.right):
                ps, pt = self.build(part)
                self.eps[s].append(ps)
                self.eps[pt].append(t)
            return s, t
        if isinstance(r, Star):
            s, t = self.state(), self.state()
            bs, bt = self.build(r.body)
            self.eps[s] += [bs, t]
            self.eps[bt] += [bs, t]
            return s, t
        if isinstance(r, Group):
            s, t = self.state(), self.state()
            bs, bt = self.build(r.body)
            self.sym[s].append((open_(r.index), bs))
            self.sym[bt].append((close(r.index), t))
            return s, t
        raise TypeError(r)

    def closure(self, q: int) -> set[int]:
        seen = {q}
        stack = [q]
        while stack:
            for nxt in self.eps[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen


def build_nfa(r: Rewb) -> ExtNfa:
    th = _Thompson()
    start, final = th.build(r)

    # epsilon elimination: keep the start and every target of a symbol edge
    kept = [start]
    index = {start: 0}
    edges: set[Edge] = set()
    finals: set[int] = set()
    todo = deque([start])
    while todo:
        q = todo.popleft()
        clo = th.closure(q)
        if final in clo:
            finals.add(index[q])
        for p in clo:
            for sym, dst in th.sym[p]:
                if dst not in index:
                    index[dst] = len(kept)
                    kept.append(dst)
                    todo.append(dst)
                edges.add((index[q], sym, index[dst]))

    n = len(kept)
    nfa = _trim(n, 0, frozenset(finals), edges)
    nfa = _merge_equivalent(nfa)
    check_conditions(nfa)
    return nfa


def _trim(n: int, start: int, finals: frozenset[int], edges: Iterable[Edge]) -> ExtNfa:
    edges = list(edges)
    fwd: dict[int, set[int]] = {q: set() for q in range(n)}
    bwd: dict[int, set[int]] = {q: set() for q in range(n)}
    for src, _, dst in edges:
        fwd[src].add(dst)
        bwd[dst].add(src)
    reach = _closure({start}, fwd)
    coreach = _closure(set(finals), bwd)
    useful = reach & coreach
    if start not in useful:
        # empty language cannot arise from rewb syntax; keep a lone start state
        return ExtNfa(1, 0, frozenset(), ())
    return _renumber(start, finals & useful,
                     [(s, c, d) for s, c, d in edges if s in useful and d in useful])


def _closure(seeds: set[int], graph: dict[int, set[int]]) -> set[int]:
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        for nxt in graph[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _renumber(start: int, finals: Iterable[int], edges: list[Edge]) -> ExtNfa:
    """Canonical numbering: breadth first from the start, edges in symbol order."""
    out: dict[int, list[tuple[Sym, int]]] = {}
    for src, sym, dst in edges:
        out.setdefault(src, []).append((sym, dst))
    order = {start: 0}
    todo = deque([start])
    while todo:
        q = todo.popleft()
        for sym, dst in sorted(out.get(q, []), key=lambda e: (sym_key(e[0]), e[1])):
            if dst not in order:
                order[dst] = len(order)
                todo.append(dst)
    new_edges = sorted(
        {(order[s], c, order[d]) for s, c, d in edges},
        key=lambda e: (e[0], sym_key(e[1]), e[2]),
    )
    return ExtNfa(len(order), 0, frozenset(order[f] for f in finals), tuple(new_edges))


def _merge_equivalent(nfa: ExtNfa) -> ExtNfa:
    """Quotient by the coarsest forward bisimulation."""
    block = {q: int(q in nfa.finals) for q in range(nfa.num_states)}
    while True:
        signatures = {
            q: (block[q], frozenset((sym, block[dst]) for sym, dst in nfa.out_edges[q]))
            for q in range(nfa.num_states)
        }
        ids: dict[tuple, int] = {}
        refined = {q: ids.setdefault(signatures[q], len(ids)) for q in range(nfa.num_states)}
        if len(ids) == len(set(block.values())):
            break
        block = refined
    edges = [(block[s], c, block[d]) for s, c, d in nfa.edges]
    return _renumber(block[nfa.start], {block[f] for f in nfa.finals}, edges)


# -- structural conditions ---------------------------------------------------

class NfaConditionError(RuntimeError):
    pass


def check_conditions(nfa: ExtNfa) -> None:
    """Verify: no useless states, and bracket edges have no parallel edge."""
    fwd = {q: {d for _, d in nfa.out_edges[q]} for q in range(nfa.num_states)}
    bwd = {q: {s for s, _ in nfa.in_edges[q]} for q in range(nfa.num_states)}
    everything = set(range(nfa.num_states))
    if _closure({nfa.start}, fwd) != everything:
        raise NfaConditionError("some state is unreachable from the start")
    if nfa.finals and _closure(set(nfa.finals), bwd) != everything:
        raise NfaConditionError("some state cannot reach a final state")
    labels: dict[tuple[int, int], set[Sym]] = {}
    for src, sym, dst in nfa.edges:
        labels.setdefault((src, dst), set()).add(sym)
    for (src, dst), syms in labels.items():
        if len(syms) > 1 and any(s.kind in (OPEN, CLOSE) for s in syms):
            raise NfaConditionError(f"bracket edge {src}->{dst} has a parallel edge")


def open_sets(nfa: ExtNfa) -> dict[int, frozenset[int]]:
    """The open-bracket set shared by every path from the start to each state."""
    table = {nfa.start: frozenset()}
    todo = deque([nfa.start])
    while todo:
        q = todo.popleft()
        for sym, dst in nfa.out_edges[q]:
            here = table[q]
            if sym.kind == OPEN:
                here = here | {sym.arg}
            elif sym.kind == CLOSE:
                here = here - {sym.arg}
            if dst not in table:
                table[dst] = here
                todo.append(dst)
            elif table[dst] != here:
                raise InconsistentOpenSets(
                    f"state {dst} is entered with open sets {sorted(table[dst])} and {sorted(here)}")
    return table


def nfa_enumerate(nfa: ExtNfa, max_len: int) -> list[RefString]:
    found: set[RefString] = set()
    layer: set[tuple[int, RefString]] = {(nfa.start, ())}
    for length in range(max_len + 1):
        found.update(v for q, v in layer if q in nfa.finals)
        if length == max_len:
            break
        layer = {(dst, v + (sym,)) for q, v in layer for sym, dst in nfa.out_edges[q]}
    return sorted(found, key=lambda v: (len(v), [sym_key(s) for s in v]))


def dump(nfa: ExtNfa, table: dict[int, frozenset[int]] | None = None) -> str:
    lines = [f"states {nfa.num_states}", f"start {nfa.start}",
             "finals " + " ".join(str(f) for f in sorted(nfa.finals))]
    if table is not None:
        for q in range(nfa.num_states):
            members = ",".join(str(i) for i in sorted(table[q]))
            lines.append(f"open {q} {{{members}}}")
    for src, sym, dst in nfa.edges:
        lines.append(f"{src} -{sym}-> {dst}")
    return "\n".join(lines) + "\n"
