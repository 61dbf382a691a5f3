"""Closedness, the closed-star condition, and reference-count bounds.

For a ref-word ``v`` and position ``i``, ``t[i][k]`` counts how often the
content of memory cell ``k`` at ``i`` is referenced directly later on, and
``s[i][k]`` is how deep that content is passed along through other cells.
Both are computed right to left. For closed-star rewbs they are bounded over
the whole ref-language; :func:`compute_bounds` finds the exact suprema with a
backward fixpoint over the NFA.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .nfa import ExtNfa
from .refstring import NUM, OPEN, Sym, open_set
from .syntax import Alt, Concat, Epsilon, Group, Ref, Rewb, Star, Terminal, subterms

DEFAULT_CAP = 64

Counts = tuple[int, ...]


def capt(r: Rewb) -> frozenset[int]:
    """Indices certainly captured by every word of ``r``.

    A star may match zero iterations, so it guarantees nothing.
    """
    if isinstance(r, (Terminal, Epsilon, Ref, Star)):
        return frozenset()
    if isinstance(r, Concat):
        return capt(r.left) | capt(r.right)
    if isinstance(r, Alt):
        return capt(r.left) & capt(r.right)
    if isinstance(r, Group):
        return capt(r.body) | {r.index}
    raise TypeError(r)


def is_closed(r: Rewb, bound: frozenset[int] | set[int] = frozenset()) -> bool:
    """Whether every reference in ``r`` is bound by ``bound`` or an earlier group."""
    bound = frozenset(bound)
    if isinstance(r, (Terminal, Epsilon)):
        return True
    if isinstance(r, Ref):
        return r.index in bound
    if isinstance(r, (Star, Group)):
        return is_closed(r.body, bound)
    if isinstance(r, Concat):
        return is_closed(r.left, bound) and is_closed(r.right, bound | capt(r.left))
    if isinstance(r, Alt):
        return is_closed(r.left, bound) and is_closed(r.right, bound)
    raise TypeError(r)


def is_closed_star(r: Rewb) -> bool:
    return all(is_closed(sub.body) for sub in subterms(r) if isinstance(sub, Star))


# -- t/s counters --------------------------------------------------------------

def t_step(after: Counts, sym: Sym) -> Counts:
    """Counter before ``sym`` given the counter after it."""
    if sym.kind == OPEN:
        return _set(after, sym.arg, 0)  # type: ignore[arg-type]
    if sym.kind == NUM:
        return _set(after, sym.arg, after[sym.arg - 1] + 1)  # type: ignore[operator]
    return after


def s_step(after: Counts, sym: Sym, open_after: frozenset[int]) -> Counts:
    """Depth before ``sym``; ``open_after`` is the open set including ``sym``."""
    if sym.kind == OPEN:
        return _set(after, sym.arg, 0)  # type: ignore[arg-type]
    if sym.kind == NUM:
        j = sym.arg
        value = max([1, after[j - 1]] + [after[l - 1] + 1 for l in open_after])  # type: ignore[operator]
        return _set(after, j, value)  # type: ignore[arg-type]
    return after


def _set(vec: Counts, index: int, value: int) -> Counts:
    out = list(vec)
    out[index - 1] = value
    return tuple(out)


def ts_sequence(v: Sequence[Sym], kappa: int) -> list[tuple[Counts, Counts]]:
    """``(t_i, s_i)`` for ``i = 0 .. len(v)``; entry ``i`` is the position after ``v[:i]``."""
    opens = [open_set(v[:i]) for i in range(len(v) + 1)]
    t: Counts = (0,) * kappa
    s: Counts = (0,) * kappa
    out = [(t, s)]
    for i in range(len(v), 0, -1):
        sym = v[i - 1]
        t = t_step(t, sym)
        s = s_step(s, sym, opens[i])
        out.append((t, s))
    out.reverse()
    return out


# -- bounds --------------------------------------------------------------------

def depths(theta: int, kappa: int, sigma: int) -> list[int]:
    out = [0]
    for _ in range(sigma):
        out.append(theta * (1 + kappa * out[-1]))
    return out


Triple = tuple[int, Counts, Counts]


@dataclass(frozen=True)
class Bounds:
    kappa: int
    theta: int
    sigma: int
    depth: tuple[int, ...]
    reachable: frozenset[Triple] = field(repr=False)

    @property
    def rho(self) -> int:
        return self.depth[self.sigma]

    def report(self) -> dict:
        return {
            "kappa": self.kappa,
            "theta": self.theta,
            "sigma": self.sigma,
            "rho": self.rho,
            "depth": list(self.depth),
            "reachable_count": len(self.reachable),
            "diverged": False,
        }


class BoundsDiverged(RuntimeError):
    def __init__(self, kappa: int, cap: int, cell: int, witness: list[str], cycle: list[str]):
        self.kappa = kappa
        self.cap = cap
        self.cell = cell
        self.witness = witness
        self.cycle = cycle
        super().__init__(
            f"counter for cell {cell} exceeds cap {cap}; cycle: {' '.join(cycle) or '?'}")

    def report(self) -> dict:
        return {
            "kappa": self.kappa,
            "cap": self.cap,
            "diverged": True,
            "cell": self.cell,
            "witness_cycle": self.cycle,
        }


def compute_bounds(nfa: ExtNfa, table: dict[int, frozenset[int]], cap: int = DEFAULT_CAP,
                   kappa: int | None = None) -> Bounds:
    """Backward reachability over ``(state, t, s)`` from the final states."""
    if cap < 1:
        raise ValueError("cap must be positive")
    if kappa is None:
        kappa = nfa.kappa
    zero: Counts = (0,) * kappa
    parent: dict[Triple, tuple[Triple, Sym] | None] = {}
    todo: deque[Triple] = deque()
    for f in sorted(nfa.finals):
        item = (f, zero, zero)
        parent[item] = None
        todo.append(item)
    while todo:
        item = todo.popleft()
        q, tau, sigma = item
        for src, sym in nfa.in_edges[q]:
            prev = (src, t_step(tau, sym), s_step(sigma, sym, table[q]))
            if prev in parent:
                continue
            parent[prev] = (item, sym)
            over = [k + 1 for k in range(kappa) if prev[1][k] > cap or prev[2][k] > cap]
            if over:
                witness, cycle = _witness(parent, prev)
                raise BoundsDiverged(kappa, cap, over[0], witness, cycle)
            todo.append(prev)
    reachable = frozenset(parent)
    theta = max((max(t, default=0) for _, t, _ in reachable), default=0)
    sigma_max = max((max(s, default=0) for _, _, s in reachable), default=0)
    return Bounds(kappa, theta, sigma_max, tuple(depths(theta, kappa, sigma_max)), reachable)


def _witness(parent: dict, item: Triple) -> tuple[list[str], list[str]]:
    """Edges from ``item`` forward to a final state, and a repeated-state loop on them."""
    states = [item[0]]
    edges: list[str] = []
    cur = item
    while parent[cur] is not None:
        nxt, sym = parent[cur]
        edges.append(f"{cur[0]}-{sym}->{nxt[0]}")
        states.append(nxt[0])
        cur = nxt
    cycle: list[str] = []
    first_seen: dict[int, int] = {}
    for pos, q in enumerate(states):
        if q in first_seen:
            cycle = edges[first_seen[q]:pos]
            break
        first_seen[q] = pos
    return edges, cycle


def analyse(r: Rewb) -> dict:
    """Classification summary used by the command line."""
    from .nfa import build_nfa, open_sets
    from .syntax import max_group_index

    out = {
        "kappa": max_group_index(r),
        "closed": is_closed(r),
        "closed_star": is_closed_star(r),
    }
    if out["closed_star"]:
        nfa = build_nfa(r)
        out["bounds"] = compute_bounds(nfa, open_sets(nfa), kappa=out["kappa"]).report()
    return out
