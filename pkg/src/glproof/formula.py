"""GL formulas: atoms, negation, disjunction, box; parsing and printing.

Conjunction and implication are parser sugar and are expanded away, so
everything downstream handles exactly four constructors.  Formulas are
interned, structurally hashable, and carry a fixed total order
(Atom < Not < Or < Box, then recursively) used to canonicalize multisets.
"""

from __future__ import annotations

import re
from typing import Iterator, NamedTuple


class Formula:
    """Base class; instances are immutable and interned."""

    __slots__ = ("hash_", "key", "weight")

    def __hash__(self) -> int:
        return self.hash_

    def __repr__(self) -> str:
        return f"<{print_formula(self)}>"

    def __str__(self) -> str:
        return print_formula(self)


class Atom(Formula):
    __slots__ = ("name",)

    _cache: dict[str, "Atom"] = {}

    def __new__(cls, name: str) -> "Atom":
        cached = cls._cache.get(name)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        self.name = name
        self.hash_ = hash(("atom", name))
        self.key = (0, name)
        self.weight = 1
        cls._cache[name] = self
        return self

    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, Atom) and self.name == other.name)

    __hash__ = Formula.__hash__

    def __reduce__(self):
        return (Atom, (self.name,))


class Not(Formula):
    __slots__ = ("sub",)

    _cache: dict[int, "Not"] = {}

    def __new__(cls, sub: Formula) -> "Not":
        cached = cls._cache.get(id(sub))
        if cached is not None:
            return cached
        self = object.__new__(cls)
        self.sub = sub
        self.hash_ = hash(("not", sub.hash_))
        self.key = (1, sub.key)
        self.weight = sub.weight + 1
        cls._cache[id(sub)] = self
        return self

    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, Not) and self.sub == other.sub)

    __hash__ = Formula.__hash__

    def __reduce__(self):
        return (Not, (self.sub,))


class Or(Formula):
    __slots__ = ("left", "right")

    _cache: dict[tuple[int, int], "Or"] = {}

    def __new__(cls, left: Formula, right: Formula) -> "Or":
        ck = (id(left), id(right))
        cached = cls._cache.get(ck)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        self.left = left
        self.right = right
        self.hash_ = hash(("or", left.hash_, right.hash_))
        self.key = (2, left.key, right.key)
        self.weight = left.weight + right.weight + 1
        cls._cache[ck] = self
        return self

    def __eq__(self, other) -> bool:
        return self is other or (
            isinstance(other, Or) and self.left == other.left and self.right == other.right
        )

    __hash__ = Formula.__hash__

    def __reduce__(self):
        return (Or, (self.left, self.right))


class Box(Formula):
    __slots__ = ("sub",)

    _cache: dict[int, "Box"] = {}

    def __new__(cls, sub: Formula) -> "Box":
        cached = cls._cache.get(id(sub))
        if cached is not None:
            return cached
        self = object.__new__(cls)
        self.sub = sub
        self.hash_ = hash(("box", sub.hash_))
        self.key = (3, sub.key)
        self.weight = sub.weight + 1
        cls._cache[id(sub)] = self
        return self

    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, Box) and self.sub == other.sub)

    __hash__ = Formula.__hash__

    def __reduce__(self):
        return (Box, (self.sub,))


def implies(a: Formula, b: Formula) -> Formula:
    """a -> b, expanded to ~a | b."""
    return Or(Not(a), b)


def conj(a: Formula, b: Formula) -> Formula:
    """a & b, expanded to ~(~a | ~b)."""
    return Not(Or(Not(a), Not(b)))


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<atom>[a-z][a-z0-9_]*)
      | (?P<box>\[\])
      | (?P<impl>->)
      | (?P<neg>~)
      | (?P<or>\|)
      | (?P<and>&)
      | (?P<lpar>\()
      | (?P<rpar>\))
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    """Malformed text; carries the character offset and what was expected."""

    def __init__(self, position: int, expected: str, text: str = ""):
        self.position = position
        self.expected = expected
        snippet = f" in {text!r}" if text else ""
        super().__init__(f"at position {position}: expected {expected}{snippet}")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(pos, "formula token", text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.parse_impl()
        kind, _, pos = self.peek()
        if kind != "eof":
            raise ParseError(pos, "end of input", self.text)
        return f

    def parse_impl(self) -> Formula:
        # right-associative
        left = self.parse_or()
        if self.peek()[0] == "impl":
            self.next()
            right = self.parse_impl()
            return implies(left, right)
        return left

    def parse_or(self) -> Formula:
        f = self.parse_and()
        while self.peek()[0] == "or":
            self.next()
            f = Or(f, self.parse_and())
        return f

    def parse_and(self) -> Formula:
        f = self.parse_unary()
        while self.peek()[0] == "and":
            self.next()
            f = conj(f, self.parse_unary())
        return f

    def parse_unary(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "neg":
            self.next()
            return Not(self.parse_unary())
        if kind == "box":
            self.next()
            return Box(self.parse_unary())
        if kind == "atom":
            self.next()
            return Atom(value)
        if kind == "lpar":
            self.next()
            f = self.parse_impl()
            k, _, p = self.next()
            if k != "rpar":
                raise ParseError(p, "')'", self.text)
            return f
        raise ParseError(pos, "formula", self.text)


def parse_formula(text: str) -> Formula:
    """Parse ASCII syntax; `&` and `->` are rewritten away immediately."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing

def print_formula(f: Formula) -> str:
    """Minimal-parentheses rendering; parse_formula(print_formula(f)) == f."""
    return _render(f, 0)


def _render(f: Formula, parent: int) -> str:
    # precedence: | is 1, unary is 2; left-assoc | keeps bare left child
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "~" + _render(f.sub, 2)
    if isinstance(f, Box):
        return "[]" + _render(f.sub, 2)
    s = _render(f.left, 1) + " | " + _render(f.right, 2)
    return "(" + s + ")" if parent > 1 else s


# ---------------------------------------------------------------------------
# Structural measures

class Closure(NamedTuple):
    subformulas: frozenset[Formula]
    weight: int
    boxed: frozenset[Formula]


def subformulas(f: Formula) -> frozenset[Formula]:
    acc: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in acc:
            continue
        acc.add(g)
        if isinstance(g, Not) or isinstance(g, Box):
            stack.append(g.sub)
        elif isinstance(g, Or):
            stack.append(g.left)
            stack.append(g.right)
    return frozenset(acc)


def closure(f: Formula) -> Closure:
    """All subterms, the connective-plus-atom count, and the boxed subterms."""
    subs = subformulas(f)
    boxed = frozenset(g for g in subs if isinstance(g, Box))
    return Closure(subs, f.weight, boxed)


def atoms_of(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


# ---------------------------------------------------------------------------
# Corpus helpers (deterministic enumeration and sampling)

def enumerate_formulas(atom_names: tuple[str, ...], max_connectives: int) -> Iterator[Formula]:
    """Yield every formula over the given atoms with at most the given number
    of connective (Not/Or/Box) occurrences, in a fixed deterministic order."""
    by_count: list[list[Formula]] = [[Atom(a) for a in atom_names]]
    yield from by_count[0]
    for n in range(1, max_connectives + 1):
        layer: list[Formula] = []
        for g in by_count[n - 1]:
            layer.append(Not(g))
        for g in by_count[n - 1]:
            layer.append(Box(g))
        for i in range(n):
            for l in by_count[i]:
                for r in by_count[n - 1 - i]:
                    layer.append(Or(l, r))
        by_count.append(layer)
        yield from layer


def random_formula(rng, atom_names: tuple[str, ...], connectives: int) -> Formula:
    """Uniform-ish random AST with exactly `connectives` connective nodes."""
    if connectives == 0:
        return Atom(rng.choice(atom_names))
    choice = rng.randrange(3)
    if choice == 0:
        return Not(random_formula(rng, atom_names, connectives - 1))
    if choice == 1:
        return Box(random_formula(rng, atom_names, connectives - 1))
    k = rng.randrange(connectives)
    return Or(
        random_formula(rng, atom_names, k),
        random_formula(rng, atom_names, connectives - 1 - k),
    )
