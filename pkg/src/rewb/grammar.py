"""Parallel multiple context-free grammars: data model, evaluation, generation.

A function maps argument tuples to an output tuple; each output component is
a pattern of terminal words and argument references ``(i, j)`` (component
``j`` of argument ``i``, both 1-based). A grammar is an MCFG when no function
uses an argument component twice.

Text format::

    pmcfg
    start S
    nonterm S dim 1
    nonterm A dim 1
    fun cp : 1 -> 1 = <$1.1 $1.1>
    fun app_a : 1 -> 1 = <$1.1 "a">
    fun nil : -> 1 = <"">
    rule S -> cp[A]
    rule A -> app_a[A]
    rule A -> nil[]
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence, Union

Item = Union[str, tuple[int, int]]
Pattern = tuple[Item, ...]
StrTuple = tuple[str, ...]


class DimensionError(ValueError):
    pass


class GrammarFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BudgetExceeded(RuntimeError):
    def __init__(self, budget: int, partial: frozenset[str]):
        super().__init__(f"derivation budget of {budget} items exhausted")
        self.budget = budget
        self.partial = partial


@dataclass(frozen=True)
class ConcatFunction:
    name: str
    arg_dims: tuple[int, ...]
    body: tuple[Pattern, ...]

    def __post_init__(self) -> None:
        for pattern in self.body:
            for item in pattern:
                if isinstance(item, tuple):
                    i, j = item
                    if not (1 <= i <= len(self.arg_dims) and 1 <= j <= self.arg_dims[i - 1]):
                        raise DimensionError(f"{self.name}: reference ${i}.{j} out of range")

    @property
    def arity(self) -> int:
        return len(self.arg_dims)

    @property
    def dim(self) -> int:
        return len(self.body)

    def __call__(self, *args: StrTuple) -> StrTuple:
        return evaluate(self, args)

    def uses(self) -> list[tuple[int, int]]:
        return [item for pattern in self.body for item in pattern if isinstance(item, tuple)]

    def is_nonduplicating(self) -> bool:
        refs = self.uses()
        return len(refs) == len(set(refs))

    def keeps_first_components(self) -> bool:
        """Every argument's first component occurs in the first output component."""
        if not self.body:
            return False
        first = set(item for item in self.body[0] if isinstance(item, tuple))
        return all((i, 1) in first for i in range(1, self.arity + 1))


def evaluate(f: ConcatFunction, args: Sequence[StrTuple]) -> StrTuple:
    if len(args) != f.arity:
        raise DimensionError(f"{f.name} takes {f.arity} arguments, got {len(args)}")
    for n, (arg, d) in enumerate(zip(args, f.arg_dims), 1):
        if len(arg) != d:
            raise DimensionError(f"{f.name}: argument {n} has dimension {len(arg)}, expected {d}")
    return tuple(
        "".join(item if isinstance(item, str) else args[item[0] - 1][item[1] - 1] for item in pattern)
        for pattern in f.body
    )


@dataclass(frozen=True)
class Rule:
    lhs: str
    fun: str
    args: tuple[str, ...] = ()


@dataclass
class Grammar:
    start: str
    dims: dict[str, int]
    functions: dict[str, ConcatFunction]
    rules: list[Rule]
    kind: str = "pmcfg"

    def __post_init__(self) -> None:
        self.check()

    def check(self) -> None:
        if self.dims.get(self.start) != 1:
            raise DimensionError(f"start symbol {self.start} must have dimension 1")
        for rule in self.rules:
            f = self.functions.get(rule.fun)
            if f is None:
                raise DimensionError(f"unknown function {rule.fun}")
            for name in (rule.lhs, *rule.args):
                if name not in self.dims:
                    raise DimensionError(f"unknown nonterminal {name}")
            if self.dims[rule.lhs] != f.dim:
                raise DimensionError(f"{rule.lhs} has dimension {self.dims[rule.lhs]} but {f.name} yields {f.dim}")
            if tuple(self.dims[a] for a in rule.args) != f.arg_dims:
                raise DimensionError(f"arguments of {rule.lhs} -> {f.name}[...] do not match its signature")
        if self.kind == "mcfg" and not is_nonduplicating(self):
            raise DimensionError("grammar declared mcfg uses an argument component twice")

    @property
    def m(self) -> int:
        return max(self.dims.values())

    @property
    def terminals(self) -> frozenset[str]:
        return frozenset(
            ch for f in self.functions.values() for p in f.body for it in p if isinstance(it, str) for ch in it)

    def rules_for(self, lhs: str) -> list[Rule]:
        return [r for r in self.rules if r.lhs == lhs]


def is_nonduplicating(g: Grammar) -> bool:
    return all(g.functions[name].is_nonduplicating() for name in _used_functions(g))


def is_unary(g: Grammar) -> bool:
    return all(g.functions[name].arity <= 1 for name in _used_functions(g))


def has_monotone_certificate(g: Grammar) -> bool:
    return all(g.functions[name].keeps_first_components()
               for name in _used_functions(g) if g.functions[name].arity >= 1)


def _used_functions(g: Grammar) -> set[str]:
    return {r.fun for r in g.rules}


# -- bounded generation --------------------------------------------------------

@dataclass
class Generation:
    words: frozenset[str]
    exact: bool
    items: dict[str, set[StrTuple]] = field(repr=False)

    @property
    def size(self) -> int:
        return sum(len(v) for v in self.items.values())


def generate(g: Grammar, max_len: int, budget: int = 2_000_000) -> Generation:
    """Forward chaining from the nullary rules, pruning long first components.

    Pruning is exact when every function keeps all its arguments' first
    components inside its own first component; otherwise ``exact`` is False
    whenever something was pruned.
    """
    certified = has_monotone_certificate(g)
    pruned = False
    items: dict[str, set[StrTuple]] = {a: set() for a in g.dims}
    by_arg: dict[str, list[tuple[Rule, int]]] = {}
    for rule in g.rules:
        for pos, arg in enumerate(rule.args):
            by_arg.setdefault(arg, []).append((rule, pos))
    todo: deque[tuple[str, StrTuple]] = deque()
    count = 0

    def add(lhs: str, value: StrTuple) -> None:
        nonlocal pruned, count
        if len(value[0]) > max_len:
            pruned = True
            return
        bucket = items[lhs]
        if value in bucket:
            return
        bucket.add(value)
        count += 1
        if count > budget:
            raise BudgetExceeded(budget, _words(items, g.start))
        todo.append((lhs, value))

    for rule in g.rules:
        if not rule.args:
            add(rule.lhs, evaluate(g.functions[rule.fun], ()))
    while todo:
        name, value = todo.popleft()
        for rule, pos in by_arg.get(name, ()):
            f = g.functions[rule.fun]
            if len(rule.args) == 1:
                add(rule.lhs, evaluate(f, (value,)))
                continue
            pools = [list(items[a]) if k != pos else [value] for k, a in enumerate(rule.args)]
            for combo in itertools.product(*pools):
                add(rule.lhs, evaluate(f, combo))
    return Generation(_words(items, g.start), certified or not pruned, items)


def _words(items: dict[str, set[StrTuple]], start: str) -> frozenset[str]:
    return frozenset(v[0] for v in items[start])


def bounded_language(g: Grammar, max_len: int, budget: int = 2_000_000) -> frozenset[str]:
    return generate(g, max_len, budget).words


# -- text format -----------------------------------------------------------------

def _format_pattern(pattern: Pattern) -> str:
    if not pattern:
        return '""'
    return " ".join(f'"{it}"' if isinstance(it, str) else f"${it[0]}.{it[1]}" for it in pattern)


def serialize(g: Grammar) -> str:
    lines = [g.kind, f"start {g.start}"]
    for name, d in g.dims.items():
        lines.append(f"nonterm {name} dim {d}")
    for f in g.functions.values():
        sig = ",".join(str(d) for d in f.arg_dims)
        body = " ; ".join(_format_pattern(p) for p in f.body)
        lines.append(f"fun {f.name} : {sig} -> {f.dim} = <{body}>".replace(":  ->", ": ->"))
    for r in g.rules:
        lines.append(f"rule {r.lhs} -> {r.fun}[{','.join(r.args)}]")
    return "\n".join(lines) + "\n"


_NAME = r"[^\s\[\],:;=<>\"#$]+"
_FUN_RE = re.compile(rf"fun\s+({_NAME})\s*:\s*([\d,\s]*)->\s*(\d+)\s*=\s*<(.*)>\s*$")
_RULE_RE = re.compile(rf"rule\s+({_NAME})\s*->\s*({_NAME})\s*\[(.*)\]\s*$")
_NONTERM_RE = re.compile(rf"nonterm\s+({_NAME})\s+dim\s+(\d+)\s*$")
_ITEM_RE = re.compile(r'\s*(?:"([a-z]*)"|\$(\d+)\.(\d+))')


def _parse_pattern(text: str, line: int) -> Pattern:
    items: list[Item] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _ITEM_RE.match(text, pos)
        if not m:
            raise GrammarFormatError(line, f"bad pattern item near {text[pos:]!r}")
        if m.group(1) is not None:
            if m.group(1):
                items.append(m.group(1))
        else:
            items.append((int(m.group(2)), int(m.group(3))))
        pos = m.end()
    return tuple(items)


def parse_grammar(text: str) -> Grammar:
    kind = None
    start = None
    dims: dict[str, int] = {}
    functions: dict[str, ConcatFunction] = {}
    rules: list[Rule] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if kind is None:
                if line not in ("pmcfg", "mcfg"):
                    raise GrammarFormatError(lineno, "expected header 'pmcfg' or 'mcfg'")
                kind = line
            elif line.startswith("start "):
                start = line.split()[1]
            elif line.startswith("nonterm "):
                m = _NONTERM_RE.match(line)
                if not m:
                    raise GrammarFormatError(lineno, "malformed nonterminal declaration")
                dims[m.group(1)] = int(m.group(2))
            elif line.startswith("fun "):
                m = _FUN_RE.match(line)
                if not m:
                    raise GrammarFormatError(lineno, "malformed function declaration")
                arg_dims = tuple(int(x) for x in m.group(2).replace(" ", "").split(",") if x)
                body = tuple(_parse_pattern(p, lineno) for p in m.group(4).split(";"))
                if len(body) != int(m.group(3)):
                    raise GrammarFormatError(lineno, f"function declares dimension {m.group(3)} "
                                                     f"but has {len(body)} components")
                functions[m.group(1)] = ConcatFunction(m.group(1), arg_dims, body)
            elif line.startswith("rule "):
                m = _RULE_RE.match(line)
                if not m:
                    raise GrammarFormatError(lineno, "malformed rule")
                args = tuple(a.strip() for a in m.group(3).split(",") if a.strip())
                rule = Rule(m.group(1), m.group(2), args)
                _check_rule(rule, dims, functions, lineno)
                rules.append(rule)
            else:
                raise GrammarFormatError(lineno, f"unknown directive {line.split()[0]!r}")
        except DimensionError as exc:
            raise GrammarFormatError(lineno, str(exc)) from exc
    if kind is None or start is None:
        raise GrammarFormatError(0, "missing header or start symbol")
    try:
        return Grammar(start, dims, functions, rules, kind)
    except DimensionError as exc:
        raise GrammarFormatError(0, str(exc)) from exc


def _check_rule(rule: Rule, dims: dict[str, int], functions: dict[str, ConcatFunction], line: int) -> None:
    f = functions.get(rule.fun)
    if f is None:
        raise GrammarFormatError(line, f"unknown function {rule.fun}")
    for name in (rule.lhs, *rule.args):
        if name not in dims:
            raise GrammarFormatError(line, f"undeclared nonterminal {name}")
    if dims[rule.lhs] != f.dim or tuple(dims[a] for a in rule.args) != f.arg_dims:
        raise GrammarFormatError(line, f"dimension mismatch in rule {rule.lhs} -> {rule.fun}")

