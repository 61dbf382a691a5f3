"""Nonerasing stack automaton for closed-star rewbs.

The automaton walks the ref-word NFA, pushing every guessed symbol onto a
stack that is never popped. A guessed reference ``#i`` is resolved in place:
the stack pointer walks down to the last ``[i`` (counting the ``#i`` it
passes), reads the bracketed content back up against the input, resolving
nested references recursively, and then climbs back to the starting ``#i``
using the count as a bookmark. The pending calls live in the control state
as a command string of bounded length, with counters bounded by ``theta``.

States are pairs ``(q, xi)`` of an NFA state and a tuple of :class:`Cmd`.
Transitions are produced on demand by :meth:`Nesa.pushdown` and
:meth:`Nesa.reading`; :func:`transition_table` materialises the part that is
reachable in the control graph.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Iterator, Optional, Sequence

from .analysis import DEFAULT_CAP, compute_bounds, is_closed_star
from .mcfg import NotClosedStar
from .nfa import ExtNfa, build_nfa, open_sets
from .refstring import CLOSE, LETTER, NUM, OPEN, RefString, Sym, format_refstring, letter
from .syntax import Rewb, letters, max_group_index

BOTTOM = Sym("bottom", 0)
END = "<|"

LEFT, STAY, RIGHT = -1, 0, 1


class Verdict(Enum):
    YES = "yes"
    NO = "no"
    BUDGET_EXCEEDED = "budget-exceeded"


@dataclass(frozen=True, order=True)
class Cmd:
    kind: str  # "call", "exec" or "ret"
    index: int
    count: int

    def __str__(self) -> str:
        return f"{self.kind}{self.index}^{self.count}"


State = tuple[int, tuple[Cmd, ...]]


def state_name(state: State) -> str:
    q, xi = state
    return str(q) + "".join("." + str(c) for c in xi)


def symbol_name(z: Sym) -> str:
    return "Z0" if z == BOTTOM else format_refstring([z])


@dataclass(frozen=True)
class PushMove:
    state: State
    d: int
    push: tuple[Sym, ...]


@dataclass(frozen=True)
class ReadMove:
    state: State
    d: int
    e: int


@dataclass(frozen=True)
class InstDesc:
    state: State
    pos: int  # index of the next unread input character
    stack: tuple[Sym, ...]  # starts with BOTTOM
    ptr: int

    def render(self, w: str) -> str:
        cells = []
        for k, z in enumerate(self.stack):
            cells.append(symbol_name(z) + ("^" if k == self.ptr else ""))
        return f"({state_name(self.state)}, {w[self.pos:]}{END}, {' '.join(cells)} $)"


class NesaStuck(RuntimeError):
    pass


class NesaBudgetExceeded(RuntimeError):
    pass


class NondeterminismError(AssertionError):
    pass


@dataclass
class Nesa:
    nfa: ExtNfa
    kappa: int
    theta: int
    sigma: int
    alphabet: frozenset[str]

    @property
    def start(self) -> State:
        return (self.nfa.start, ())

    def is_final(self, state: State) -> bool:
        return not state[1] and state[0] in self.nfa.finals

    def stack_alphabet(self) -> list[Sym]:
        syms = [BOTTOM] + [letter(a) for a in sorted(self.alphabet)]
        for i in range(1, self.kappa + 1):
            syms += [Sym(OPEN, i), Sym(CLOSE, i), Sym(NUM, i)]
        return syms

    def inputs(self) -> list[str]:
        return sorted(self.alphabet) + [END]

    # -- the two transition modes --------------------------------------------

    def pushdown(self, state: State, c: str, top: Sym) -> list[PushMove]:
        """Push moves: only base states guess a symbol and write it to the stack."""
        q, xi = state
        if xi:
            return []
        moves = []
        for sym, dst in self.nfa.out_edges[q]:
            if sym.kind == LETTER:
                if c == sym.arg:
                    moves.append(PushMove((dst, ()), RIGHT, (sym,)))
            elif sym.kind in (OPEN, CLOSE):
                moves.append(PushMove((dst, ()), STAY, (sym,)))
            elif self.sigma >= 1:
                moves.append(PushMove((dst, (Cmd("call", sym.arg, 0),)), STAY, (sym,)))
        return moves

    def reading(self, state: State, c: str, square: Sym, at_top: bool) -> list[ReadMove]:
        """Read moves: pointer walks driven by the command on top of the state."""
        q, xi = state
        if not xi:
            return []
        rest, cmd = xi[:-1], xi[-1]
        i, x = cmd.index, cmd.count

        def to(*cmds: Cmd) -> State:
            return (q, rest + cmds)

        if cmd.kind == "call":
            if square == Sym(NUM, i):
                if x < self.theta:
                    return [ReadMove(to(Cmd("call", i, x + 1)), STAY, LEFT)]
                return []
            if square == Sym(OPEN, i):
                return [ReadMove(to(Cmd("exec", i, x)), STAY, RIGHT)]
            if square == BOTTOM:
                return [ReadMove(to(Cmd("ret", i, x)), STAY, RIGHT)]
            return [ReadMove(state, STAY, LEFT)]
        if cmd.kind == "exec":
            if square.kind == LETTER:
                if c == square.arg:
                    return [ReadMove(state, RIGHT, RIGHT)]
                return []
            if square == Sym(CLOSE, i):
                return [ReadMove(to(Cmd("ret", i, x)), STAY, RIGHT)]
            if square.kind in (OPEN, CLOSE) and square.arg != i:
                return [ReadMove(state, STAY, RIGHT)]
            if square.kind == NUM and square.arg != i and len(xi) < self.sigma:
                return [ReadMove((q, xi + (Cmd("call", square.arg, 0),)), STAY, STAY)]
            return []
        # ret
        if x == 0:
            return [ReadMove((q, rest), STAY, STAY)]
        if square == Sym(NUM, i):
            return [ReadMove(to(Cmd("ret", i, x - 1)), STAY, STAY if at_top else RIGHT)]
        return [ReadMove(state, STAY, RIGHT)]

    # -- the step relation -----------------------------------------------------

    def initial(self) -> InstDesc:
        return InstDesc(self.start, 0, (BOTTOM,), 0)

    def step(self, ident: InstDesc, w: str) -> list[InstDesc]:
        """All one-step successors of ``ident`` on input ``w``."""
        c = w[ident.pos] if ident.pos < len(w) else END
        at_top = ident.ptr == len(ident.stack) - 1
        out = []
        if at_top:
            for m in self.pushdown(ident.state, c, ident.stack[-1]):
                if c == END and m.d == RIGHT:
                    continue
                stack = ident.stack + m.push
                out.append(InstDesc(m.state, ident.pos + m.d, stack, len(stack) - 1))
        for m in self.reading(ident.state, c, ident.stack[ident.ptr], at_top):
            if c == END and m.d == RIGHT:
                continue
            ptr = ident.ptr + m.e
            if not 0 <= ptr < len(ident.stack):
                continue
            out.append(InstDesc(m.state, ident.pos + m.d, ident.stack, ptr))
        return out

    def is_accepting(self, ident: InstDesc, w: str) -> bool:
        return self.is_final(ident.state) and ident.pos == len(w)


def construct_nesa(r: Rewb, cap: int = DEFAULT_CAP) -> Nesa:
    if not is_closed_star(r):
        raise NotClosedStar("rewb is not closed-star")
    kappa = max_group_index(r)
    nfa = build_nfa(r)
    bounds = compute_bounds(nfa, open_sets(nfa), cap, kappa)
    return Nesa(nfa, kappa, bounds.theta, bounds.sigma, letters(r))


build_nesa = construct_nesa


# -- big step for a guessed reference ------------------------------------------------

def istep_bigstep(n: Nesa, ident: InstDesc, w: str,
                  trace: Optional[list[InstDesc]] = None) -> InstDesc:
    """Run the call/exec/ret cascade started by pushing a reference.

    ``ident`` must be the ID right after a reference was pushed. Returns the first ID
    whose state is a base NFA state again. Every intermediate ID must have at
    most one successor; otherwise :class:`NondeterminismError` is raised.
    """
    cur = ident
    while cur.state[1]:
        if trace is not None:
            trace.append(cur)
        nxt = n.step(cur, w)
        if not nxt:
            raise NesaStuck(f"stuck at {cur.render(w)}")
        if len(nxt) > 1:
            raise NondeterminismError(f"{len(nxt)} moves at {cur.render(w)}")
        cur = nxt[0]
    return cur


# -- guided acceptance -----------------------------------------------------------------

@dataclass
class AcceptResult:
    verdict: Verdict
    witness: Optional[RefString] = None
    expansions: int = 0
    bigsteps: int = 0

    def __bool__(self) -> bool:
        return self.verdict is Verdict.YES


@dataclass
class _Node:
    ident: InstDesc
    mems: tuple[str, ...]
    path: RefString = field(default=())


def _advance_mems(mems: tuple[str, ...], sym: Sym, opened: frozenset[int]) -> tuple[str, ...]:
    """Memory contents after ``sym``, given the open cells before it."""
    if sym.kind == LETTER:
        return tuple(m + sym.arg if j + 1 in opened else m for j, m in enumerate(mems))
    if sym.kind == NUM:
        piece = mems[sym.arg - 1]
        return tuple(m + piece if j + 1 in opened else m for j, m in enumerate(mems))
    if sym.kind == OPEN:
        return tuple("" if j + 1 == sym.arg else m for j, m in enumerate(mems))
    return mems


def accepts(n: Nesa, w: str, budget: int = 200_000, want_witness: bool = False) -> AcceptResult:
    """Search over guessed ref-words; branching happens only at push moves.

    Nodes are base-state IDs with the pointer on top. Two nodes with the same
    NFA state, input position and memory contents of the stack have the same
    futures, so only the first is expanded.
    """
    table = open_sets(n.nfa)
    start = _Node(n.initial(), ("",) * n.kappa)
    seen = {(start.ident.state[0], 0, start.mems)}
    todo = [start]
    expansions = bigsteps = 0
    while todo:
        node = todo.pop()
        ident = node.ident
        if n.is_accepting(ident, w):
            return AcceptResult(Verdict.YES, node.path if want_witness else None, expansions, bigsteps)
        expansions += 1
        if expansions > budget:
            return AcceptResult(Verdict.BUDGET_EXCEEDED, None, expansions, bigsteps)
        q = ident.state[0]
        for succ in n.step(ident, w):
            sym = succ.stack[-1]
            if succ.state[1]:
                bigsteps += 1
                try:
                    succ = istep_bigstep(n, succ, w)
                except NesaStuck:
                    continue
            mems = _advance_mems(node.mems, sym, table[q])
            key = (succ.state[0], succ.pos, mems)
            if key in seen:
                continue
            seen.add(key)
            todo.append(_Node(succ, mems, node.path + (sym,) if want_witness else ()))
    return AcceptResult(Verdict.NO, None, expansions, bigsteps)


def nesa_language(n: Nesa, max_len: int, budget: int = 200_000) -> frozenset[str]:
    """Accepted words up to ``max_len`` over the rewb's letters (by membership queries)."""
    found = set()
    letters_ = sorted(n.alphabet)
    for length in range(max_len + 1):
        for chars in product(letters_, repeat=length):
            w = "".join(chars)
            result = accepts(n, w, budget)
            if result.verdict is Verdict.BUDGET_EXCEEDED:
                raise NesaBudgetExceeded(f"budget of {budget} expansions exceeded on {w!r}")
            if result:
                found.add(w)
    return frozenset(found)


def run_word(n: Nesa, v: RefString, w: str, run: Optional[Sequence[int]] = None) -> list[InstDesc]:
    """Drive the automaton along the ref-word ``v`` and return every ID visited.

    ``run`` fixes the NFA states to pass through; by default the first
    accepting run of ``v`` is used (or, if there is none, any choice).
    """
    if run is None:
        runs = n.nfa.runs(v)
        run = runs[0] if runs else None
    cur = n.initial()
    trace = [cur]
    for i, sym in enumerate(v):
        choices = [s for s in n.step(cur, w) if s.stack[-1] == sym and len(s.stack) == len(cur.stack) + 1
                   and (run is None or s.state[0] == run[i + 1])]
        if not choices:
            raise NesaStuck(f"cannot guess {symbol_name(sym)} at {cur.render(w)}")
        cur = choices[0]
        if cur.state[1]:
            inner: list[InstDesc] = []
            cur = istep_bigstep(n, cur, w, inner)
            trace += inner
        trace.append(cur)
    return trace


# -- control-reachable transition table --------------------------------------------------

@dataclass(frozen=True)
class Transition:
    mode: str  # "push" or "read"
    state: State
    c: str
    square: Sym
    at_top: bool
    target: State
    d: int
    rest: object  # pushed symbols (push) or pointer move (read)

    def render(self) -> str:
        sq = symbol_name(self.square) + ("$" if self.at_top else "")
        lhs = f"{state_name(self.state)}, {self.c}, {sq}"
        if self.mode == "push":
            pushed = " ".join(symbol_name(z) for z in self.rest)  # type: ignore[union-attr]
            return f"push {lhs} -> {state_name(self.target)}, {self.d}, {symbol_name(self.square)} {pushed}$"
        return f"read {lhs} -> {state_name(self.target)}, {self.d}, {self.rest}"


def transition_table(n: Nesa, limit: int = 200_000) -> list[Transition]:
    """Transitions of every state reachable from the start in the control graph."""
    seen = {n.start}
    todo = deque([n.start])
    table: list[Transition] = []
    squares = n.stack_alphabet()
    while todo:
        st = todo.popleft()
        for c in n.inputs():
            for z in squares:
                for m in n.pushdown(st, c, z):
                    table.append(Transition("push", st, c, z, True, m.state, m.d, m.push))
                    _visit(m.state, seen, todo)
                for at_top in (True, False):
                    for r in n.reading(st, c, z, at_top):
                        table.append(Transition("read", st, c, z, at_top, r.state, r.d, r.e))
                        _visit(r.state, seen, todo)
        if len(table) > limit:
            raise RuntimeError(f"transition table exceeds {limit} entries")
    return table


def _visit(st: State, seen: set[State], todo: deque) -> None:
    if st not in seen:
        seen.add(st)
        todo.append(st)


def nonerasing_audit(n: Nesa, table: list[Transition] | None = None) -> list[str]:
    """Violations of the structural contract: empty pushes, leftward input moves, bounds."""
    if table is None:
        table = transition_table(n)
    problems = []
    for t in table:
        if t.mode == "push" and not t.rest:
            problems.append(f"empty push: {t.render()}")
        if t.d not in (STAY, RIGHT):
            problems.append(f"input moves left: {t.render()}")
        xi = t.target[1]
        if len(xi) > n.sigma or any(cmd.count > n.theta for cmd in xi):
            problems.append(f"state out of range: {t.render()}")
    return problems


def dump(n: Nesa) -> str:
    table = transition_table(n)
    states = sorted({t.state for t in table} | {t.target for t in table} | {n.start})
    lines = [
        "nesa",
        f"theta {n.theta}",
        f"sigma {n.sigma}",
        "states " + " ".join(state_name(s) for s in states),
        f"start {state_name(n.start)}",
        "finals " + " ".join(str(f) for f in sorted(n.nfa.finals)),
        "stack " + " ".join(symbol_name(z) for z in n.stack_alphabet()),
    ]
    lines += [t.render() for t in table]
    return "\n".join(lines) + "\n"


def iter_ids(n: Nesa, w: str, limit: int = 10_000) -> Iterator[InstDesc]:
    """Breadth-first exploration of the general step relation (for small audits)."""
    start = n.initial()
    seen = {start}
    todo = deque([start])
    while todo and len(seen) <= limit:
        cur = todo.popleft()
        yield cur
        for nxt in n.step(cur, w):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
