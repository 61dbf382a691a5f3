"""Abstract syntax, concrete syntax and well-formedness of rewbs.

Concrete syntax::

    a..z        terminal
    ~           the empty word
    \\i          reference to group i
    (_i ... )_i capturing group i
    ( ... )     plain grouping
    r*          star (postfix, binds tightest)
    r s         concatenation (juxtaposition, left-associative)
    r + s       alternation (loosest, left-associative)

Whitespace is ignored everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class RewbSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class InvalidRewb(ValueError):
    """Raised when an AST breaks the group/reference nesting rule."""

    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


@dataclass(frozen=True)
class Terminal:
    letter: str


@dataclass(frozen=True)
class Epsilon:
    pass


@dataclass(frozen=True)
class Ref:
    index: int


@dataclass(frozen=True)
class Concat:
    left: Rewb
    right: Rewb


@dataclass(frozen=True)
class Alt:
    left: Rewb
    right: Rewb


@dataclass(frozen=True)
class Star:
    body: Rewb


@dataclass(frozen=True)
class Group:
    index: int
    body: Rewb


Rewb = Union[Terminal, Epsilon, Ref, Concat, Alt, Star, Group]

ALPHABET = "abcdefghijklmnopqrstuvwxyz"


# -- parsing -----------------------------------------------------------------

def _tokenize(text: str) -> list[tuple[str, object, int]]:
    tokens: list[tuple[str, object, int]] = []
    i, n = 0, len(text)

    def digits(j: int) -> tuple[int, int]:
        k = j
        while k < n and text[k].isdigit():
            k += 1
        if k == j:
            raise RewbSyntaxError("expected an index", j)
        value = int(text[j:k])
        if value == 0:
            raise RewbSyntaxError("index 0 is not allowed", j)
        return value, k

    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in ALPHABET:
            tokens.append(("letter", ch, i))
            i += 1
        elif ch == "~":
            tokens.append(("eps", None, i))
            i += 1
        elif ch == "\\":
            value, j = digits(i + 1)
            tokens.append(("ref", value, i))
            i = j
        elif ch == "(":
            if i + 1 < n and text[i + 1] == "_":
                value, j = digits(i + 2)
                tokens.append(("gopen", value, i))
                i = j
            else:
                tokens.append(("(", None, i))
                i += 1
        elif ch == ")":
            if i + 1 < n and text[i + 1] == "_":
                value, j = digits(i + 2)
                tokens.append(("gclose", value, i))
                i = j
            else:
                tokens.append((")", None, i))
                i += 1
        elif ch in "+*":
            tokens.append((ch, None, i))
            i += 1
        else:
            raise RewbSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, object, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, object, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def alternation(self) -> Rewb:
        node = self.concatenation()
        while self.peek()[0] == "+":
            self.take()
            node = Alt(node, self.concatenation())
        return node

    def concatenation(self) -> Rewb:
        kind, _, where = self.peek()
        if kind not in ("letter", "eps", "ref", "gopen", "("):
            raise RewbSyntaxError("expected an expression", where)
        node = self.postfix()
        while self.peek()[0] in ("letter", "eps", "ref", "gopen", "("):
            node = Concat(node, self.postfix())
        return node

    def postfix(self) -> Rewb:
        node = self.atom()
        while self.peek()[0] == "*":
            self.take()
            node = Star(node)
        return node

    def atom(self) -> Rewb:
        kind, value, where = self.take()
        if kind == "letter":
            return Terminal(value)  # type: ignore[arg-type]
        if kind == "eps":
            return Epsilon()
        if kind == "ref":
            return Ref(value)  # type: ignore[arg-type]
        if kind == "(":
            body = self.alternation()
            ckind, _, cwhere = self.take()
            if ckind != ")":
                raise RewbSyntaxError("expected ')'", cwhere)
            return body
        if kind == "gopen":
            body = self.alternation()
            ckind, cvalue, cwhere = self.take()
            if ckind != "gclose":
                raise RewbSyntaxError(f"expected ')_{value}'", cwhere)
            if cvalue != value:
                raise RewbSyntaxError(
                    f"group opened as {value} but closed as {cvalue}", cwhere)
            return Group(value, body)  # type: ignore[arg-type]
        raise RewbSyntaxError("expected an expression", where)


def parse(text: str) -> Rewb:
    parser = _Parser(text)
    node = parser.alternation()
    kind, _, where = parser.peek()
    if kind != "end":
        raise RewbSyntaxError("unexpected trailing input", where)
    return node


def parse_valid(text: str) -> Rewb:
    """Parse and reject expressions that break the nesting rule."""
    node = parse(text)
    problems = validate(node)
    if problems:
        raise InvalidRewb(problems)
    return node


# -- printing ----------------------------------------------------------------

def pretty(node: Rewb) -> str:
    return _pretty(node, 0)


def _pretty(node: Rewb, ctx: int) -> str:
    # ctx: 0 alternation operand, 1 left of concat, 2 right of concat / star body
    if isinstance(node, Terminal):
        return node.letter
    if isinstance(node, Epsilon):
        return "~"
    if isinstance(node, Ref):
        return f"\\{node.index}"
    if isinstance(node, Group):
        return f"(_{node.index}{_pretty(node.body, 0)})_{node.index}"
    if isinstance(node, Star):
        return _pretty(node.body, 2) + "*"
    if isinstance(node, Concat):
        text = _pretty(node.left, 1) + _pretty(node.right, 2)
        return f"({text})" if ctx >= 2 else text
    if isinstance(node, Alt):
        text = _pretty(node.left, 0) + "+" + _pretty(node.right, 1)
        return f"({text})" if ctx >= 1 else text
    raise TypeError(f"not a rewb node: {node!r}")


# -- structure ---------------------------------------------------------------

def children(node: Rewb) -> tuple[Rewb, ...]:
    if isinstance(node, (Concat, Alt)):
        return (node.left, node.right)
    if isinstance(node, (Star, Group)):
        return (node.body,)
    return ()


def subterms(node: Rewb) -> Iterator[Rewb]:
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(children(cur)))


def max_group_index(node: Rewb) -> int:
    best = 0
    for sub in subterms(node):
        if isinstance(sub, (Ref, Group)):
            best = max(best, sub.index)
    return best


def letters(node: Rewb) -> frozenset[str]:
    return frozenset(s.letter for s in subterms(node) if isinstance(s, Terminal))


@dataclass(frozen=True)
class Violation:
    path: tuple[str, ...]
    group: int
    offender: str  # "group" or "ref"

    def __str__(self) -> str:
        where = "/".join(self.path) or "<root>"
        what = f"(_{self.group}" if self.offender == "group" else f"\\{self.group}"
        return f"{what} at {where} lies inside group {self.group}"


def validate(node: Rewb) -> list[Violation]:
    """Return every place where a group contains its own index; empty if valid."""
    found: list[Violation] = []

    def walk(cur: Rewb, path: tuple[str, ...], enclosing: frozenset[int]) -> None:
        if isinstance(cur, Ref) and cur.index in enclosing:
            found.append(Violation(path, cur.index, "ref"))
        elif isinstance(cur, Group):
            if cur.index in enclosing:
                found.append(Violation(path, cur.index, "group"))
            walk(cur.body, path + ("body",), enclosing | {cur.index})
        elif isinstance(cur, (Concat, Alt)):
            walk(cur.left, path + ("left",), enclosing)
            walk(cur.right, path + ("right",), enclosing)
        elif isinstance(cur, Star):
            walk(cur.body, path + ("body",), enclosing)

    walk(node, (), frozenset())
    return found


def is_valid(node: Rewb) -> bool:
    return not validate(node)
