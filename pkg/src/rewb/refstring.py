"""Ref-words over the extended alphabet and the dereferencing semantics.

A ref-word mixes letters with numbered brackets ``[i``/``]i`` and number
characters ``#i``. Dereferencing replaces every ``#i``, left to right, by the
letters of the most recent ``i``-bracketed region of the already dereferenced
prefix. The language of a rewb is the image of its ref-language under that
map; :func:`lang_oracle` computes bounded slices of it by brute force.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

from .syntax import Alt, Concat, Epsilon, Group, Ref, Rewb, Star, Terminal, max_group_index

LETTER, OPEN, CLOSE, NUM = "letter", "open", "close", "num"


class Sym(NamedTuple):
    kind: str
    arg: Union[str, int]

    def __str__(self) -> str:
        if self.kind == LETTER:
            return str(self.arg)
        return {OPEN: "[", CLOSE: "]", NUM: "#"}[self.kind] + str(self.arg)


def letter(a: str) -> Sym:
    return Sym(LETTER, a)


def open_(i: int) -> Sym:
    return Sym(OPEN, i)


def close(i: int) -> Sym:
    return Sym(CLOSE, i)


def num(i: int) -> Sym:
    return Sym(NUM, i)


RefString = tuple[Sym, ...]


def parse_refstring(text: str) -> RefString:
    """Parse the space-separated token form, e.g. ``"[1 a b ]1 #1"``."""
    out: list[Sym] = []
    for tok in text.split():
        head, rest = tok[0], tok[1:]
        if head in "[]#":
            if not rest.isdigit() or int(rest) < 1:
                raise ValueError(f"bad index in token {tok!r}")
            kind = {"[": OPEN, "]": CLOSE, "#": NUM}[head]
            out.append(Sym(kind, int(rest)))
        elif len(tok) == 1 and tok.isalpha() and tok.islower():
            out.append(letter(tok))
        else:
            raise ValueError(f"bad token {tok!r}")
    return tuple(out)


def format_refstring(v: Iterable[Sym]) -> str:
    return " ".join(str(s) for s in v)


def project(v: Iterable[Sym]) -> str:
    """Erase everything but letters."""
    return "".join(s.arg for s in v if s.kind == LETTER)  # type: ignore[misc]


# -- dereferencing -----------------------------------------------------------

def fetch(i: int, v: Sequence[Sym]) -> str:
    """Letters of the rightmost, possibly unclosed, ``i``-bracketed region."""
    start = None
    for pos in range(len(v) - 1, -1, -1):
        if v[pos] == (OPEN, i):
            start = pos
            break
    if start is None:
        return ""
    out = []
    for s in v[start + 1:]:
        if s.kind == CLOSE and s.arg == i:
            break
        if s.kind == NUM:
            raise ValueError("fetch is undefined on words with number characters")
        if s.kind == LETTER:
            out.append(s.arg)
    return "".join(out)  # type: ignore[arg-type]


def deref_pre(v: Sequence[Sym]) -> RefString:
    out: list[Sym] = []
    for s in v:
        if s.kind == NUM:
            out.extend(letter(a) for a in fetch(s.arg, out))  # type: ignore[arg-type]
        else:
            out.append(s)
    return tuple(out)


def deref(v: Sequence[Sym]) -> str:
    return project(deref_pre(v))


def mem(i: int, v: Sequence[Sym]) -> str:
    return fetch(i, deref_pre(v))


def open_set(v: Iterable[Sym]) -> frozenset[int]:
    current: set[int] = set()
    for s in v:
        if s.kind == OPEN:
            current.add(s.arg)  # type: ignore[arg-type]
        elif s.kind == CLOSE:
            current.discard(s.arg)  # type: ignore[arg-type]
    return frozenset(current)


def is_matching(v: Sequence[Sym]) -> bool:
    """Every ``#i`` preceded by some ``[i`` has a ``]i`` in between."""
    # per index: None (no [i yet), True (last [i closed), False (open)
    state: dict[int, bool] = {}
    for s in v:
        if s.kind == OPEN:
            state[s.arg] = False  # type: ignore[index]
        elif s.kind == CLOSE:
            if s.arg in state:
                state[s.arg] = True  # type: ignore[index]
        elif s.kind == NUM and state.get(s.arg) is False:  # type: ignore[arg-type]
            return False
    return True


# -- the ref-language as a regular expression over Sym ---------------------
#
# Terms: ("sym", Sym) | ("eps",) | ("cat", t, u) | ("alt", t, u) | ("star", t)

EPS = ("eps",)


def to_term(r: Rewb) -> tuple:
    if isinstance(r, Terminal):
        return ("sym", letter(r.letter))
    if isinstance(r, Epsilon):
        return EPS
    if isinstance(r, Ref):
        return ("sym", num(r.index))
    if isinstance(r, Concat):
        return ("cat", to_term(r.left), to_term(r.right))
    if isinstance(r, Alt):
        return ("alt", to_term(r.left), to_term(r.right))
    if isinstance(r, Star):
        return ("star", to_term(r.body))
    if isinstance(r, Group):
        inner = ("cat", ("sym", open_(r.index)), to_term(r.body))
        return ("cat", inner, ("sym", close(r.index)))
    raise TypeError(r)


def _nullable(t: tuple) -> bool:
    tag = t[0]
    if tag == "eps" or tag == "star":
        return True
    if tag == "sym":
        return False
    if tag == "cat":
        return _nullable(t[1]) and _nullable(t[2])
    return _nullable(t[1]) or _nullable(t[2])


def _cat(t: tuple, u: tuple) -> tuple:
    if t == EPS:
        return u
    if u == EPS:
        return t
    return ("cat", t, u)


def _derivatives(t: tuple) -> dict[Sym, set[tuple]]:
    """Antimirov partial derivatives of ``t`` for every symbol at once."""
    tag = t[0]
    out: dict[Sym, set[tuple]] = {}
    if tag == "sym":
        out[t[1]] = {EPS}
    elif tag == "alt":
        for part in (t[1], t[2]):
            for s, ds in _derivatives(part).items():
                out.setdefault(s, set()).update(ds)
    elif tag == "cat":
        for s, ds in _derivatives(t[1]).items():
            out.setdefault(s, set()).update(_cat(d, t[2]) for d in ds)
        if _nullable(t[1]):
            for s, ds in _derivatives(t[2]).items():
                out.setdefault(s, set()).update(ds)
    elif tag == "star":
        for s, ds in _derivatives(t[1]).items():
            out.setdefault(s, set()).update(_cat(d, t) for d in ds)
    return out


def _bounded(t: tuple, max_len: int) -> set[RefString]:
    tag = t[0]
    if tag == "eps":
        return {()}
    if tag == "sym":
        return {(t[1],)} if max_len >= 1 else set()
    if tag == "alt":
        return _bounded(t[1], max_len) | _bounded(t[2], max_len)
    if tag == "cat":
        left = _bounded(t[1], max_len)
        right = _bounded(t[2], max_len)
        return {x + y for x in left for y in right if len(x) + len(y) <= max_len}
    body = {x for x in _bounded(t[1], max_len) if x}
    result: set[RefString] = {()}
    layer: set[RefString] = {()}
    while layer:
        layer = {x + y for x in layer for y in body if len(x) + len(y) <= max_len} - result
        result |= layer
    return result


def ref_enumerate(r: Rewb, max_len: int) -> list[RefString]:
    """All members of the ref-language of ``r`` of length at most ``max_len``."""
    return sorted(_bounded(to_term(r), max_len), key=_refkey)


def _refkey(v: RefString) -> tuple:
    return (len(v), [(s.kind, str(s.arg)) for s in v])


# -- bounded language oracle -----------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    words: frozenset[str]
    saturated: bool
    max_ref_len: int

    def sorted_words(self) -> list[str]:
        return sorted(self.words, key=lambda w: (len(w), w))


def lang_oracle(r: Rewb, max_word_len: int, max_ref_len: int) -> OracleResult:
    """Words ``deref(v)`` with ``v`` in the ref-language, ``|v| <= max_ref_len``
    and ``|deref(v)| <= max_word_len``.

    Prefixes are explored breadth first over Antimirov derivatives of the
    ref-language. A prefix is dropped once its dereference is too long, which
    is safe because dereferencing a longer word only extends the result. Two
    prefixes that agree on the residual expression, open set, dereference and
    every memory cell have the same continuations, so only the shortest is
    kept. The result is saturated when no prefix of length ``max_ref_len + 1``
    survives, i.e. raising the ref-length bound cannot add words.
    """
    kappa = max_group_index(r)
    start = to_term(r)
    words: set[str] = set()
    frontier: list[tuple[tuple, RefString]] = [(start, ())]
    seen = {_oracle_key(start, (), kappa)}
    length = 0
    while frontier:
        nxt: list[tuple[tuple, RefString]] = []
        for term, pre in frontier:
            if _nullable(term):
                words.add(project(pre))
            for sym, targets in _derivatives(term).items():
                if sym.kind == NUM:
                    grown = pre + tuple(letter(a) for a in fetch(sym.arg, pre))  # type: ignore[arg-type]
                else:
                    grown = pre + (sym,)
                if len(project(grown)) > max_word_len:
                    continue
                for target in targets:
                    key = _oracle_key(target, grown, kappa)
                    if key not in seen:
                        seen.add(key)
                        nxt.append((target, grown))
        if length == max_ref_len:
            return OracleResult(frozenset(words), not nxt, max_ref_len)
        frontier = nxt
        length += 1
    return OracleResult(frozenset(words), True, max_ref_len)


def _oracle_key(term: tuple, pre: RefString, kappa: int) -> tuple:
    mems = tuple(fetch(i, pre) for i in range(1, kappa + 1))
    return (term, project(pre), open_set(pre), mems)


def lang_until_saturated(r: Rewb, max_word_len: int, hard_cap: int = 256) -> OracleResult:
    """Grow the ref-length bound until the oracle saturates or ``hard_cap``."""
    bound = min(hard_cap, max(4, 2 * max_word_len))
    while True:
        result = lang_oracle(r, max_word_len, bound)
        if result.saturated or bound >= hard_cap:
            return result
        bound = min(hard_cap, 2 * bound)


def lang_bruteforce(r: Rewb, max_word_len: int, max_ref_len: int) -> frozenset[str]:
    """Plain enumeration of the bounded ref-language followed by deref."""
    out = set()
    for v in ref_enumerate(r, max_ref_len):
        w = deref(v)
        if len(w) <= max_word_len:
            out.add(w)
    return frozenset(out)
