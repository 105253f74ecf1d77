"""Compositional graph notation.

Atoms::

    P<n>            path with n sites
    Pw<n>:<w>       path whose internal edges carry weight w
    C<n>            cycle with n sites
    DiC<n>(a,b)     n-cycle split by the chord (a, b)

Operators, all left-associative with equal precedence::

    A+B             new edge from the target of A to the start of B
    A/B             target of A merged with the start of B
    h(A)            add handles at both transport endpoints
    chain(U,k)      sugar for h(U/U/.../U) with k copies of U

Parentheses may be used for grouping. ``parse`` returns an immutable
expression tree and ``to_text`` prints its canonical whitespace-free form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

__all__ = [
    "Path",
    "Cycle",
    "DiCycle",
    "Handles",
    "Join",
    "Merge",
    "Chain",
    "GraphSpec",
    "NotationError",
    "NotationSyntaxError",
    "NotationSemanticError",
    "parse",
    "to_text",
    "validate",
]


class NotationError(ValueError):
    """Base class for notation errors."""


class NotationSyntaxError(NotationError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class NotationSemanticError(NotationError):
    """Raised when an atom is well formed but violates a size constraint."""


@dataclass(frozen=True)
class Path:
    n: int
    weight: Optional[float] = None


@dataclass(frozen=True)
class Cycle:
    n: int


@dataclass(frozen=True)
class DiCycle:
    n: int
    a: int
    b: int
    # explicit target vertex; None means floor(n/2)+1
    target: Optional[int] = None


@dataclass(frozen=True)
class Handles:
    child: "GraphSpec"


@dataclass(frozen=True)
class Join:
    left: "GraphSpec"
    right: "GraphSpec"


@dataclass(frozen=True)
class Merge:
    left: "GraphSpec"
    right: "GraphSpec"


@dataclass(frozen=True)
class Chain:
    unit: "GraphSpec"
    count: int

    def expand(self) -> Handles:
        body: GraphSpec = self.unit
        for _ in range(self.count - 1):
            body = Merge(body, self.unit)
        return Handles(body)


GraphSpec = Union[Path, Cycle, DiCycle, Handles, Join, Merge, Chain]


def validate(spec: GraphSpec) -> GraphSpec:
    """Check atom size constraints over the whole tree; return ``spec``."""
    if isinstance(spec, Path):
        if spec.n < 1:
            raise NotationSemanticError(f"path needs at least 1 site, got P{spec.n}")
        if spec.weight is not None:
            if spec.n < 3:
                raise NotationSemanticError("weighted path needs at least 3 sites")
            if not spec.weight > 0:
                raise NotationSemanticError("path weight must be positive")
    elif isinstance(spec, Cycle):
        if spec.n < 3:
            raise NotationSemanticError(f"cycle needs at least 3 sites, got C{spec.n}")
    elif isinstance(spec, DiCycle):
        n, a, b = spec.n, spec.a, spec.b
        if n < 4:
            raise NotationSemanticError(f"DiC needs at least 4 sites, got DiC{n}")
        if not 1 <= a < b <= n:
            raise NotationSemanticError(f"chord ({a},{b}) out of range for DiC{n}")
        if b - a < 2 or (a == 1 and b == n):
            raise NotationSemanticError(f"chord ({a},{b}) is already a cycle edge")
        if spec.target is not None and not (2 <= spec.target <= n):
            raise NotationSemanticError(f"target {spec.target} out of range for DiC{n}")
    elif isinstance(spec, Handles):
        validate(spec.child)
    elif isinstance(spec, (Join, Merge)):
        validate(spec.left)
        validate(spec.right)
    elif isinstance(spec, Chain):
        if spec.count < 1:
            raise NotationSemanticError("chain needs at least one unit")
        validate(spec.unit)
    else:
        raise TypeError(f"not a graph spec: {spec!r}")
    return spec


def _fmt_weight(w: float) -> str:
    s = repr(float(w))
    return s[:-2] if s.endswith(".0") else s


def to_text(spec: GraphSpec) -> str:
    """Canonical whitespace-free rendering; ``parse(to_text(s)) == s``."""
    if isinstance(spec, Path):
        if spec.weight is None:
            return f"P{spec.n}"
        return f"Pw{spec.n}:{_fmt_weight(spec.weight)}"
    if isinstance(spec, Cycle):
        return f"C{spec.n}"
    if isinstance(spec, DiCycle):
        extra = "" if spec.target is None else f",{spec.target}"
        return f"DiC{spec.n}({spec.a},{spec.b}{extra})"
    if isinstance(spec, Handles):
        return f"h({to_text(spec.child)})"
    if isinstance(spec, Chain):
        return f"chain({to_text(spec.unit)},{spec.count})"
    if isinstance(spec, (Join, Merge)):
        op = "+" if isinstance(spec, Join) else "/"
        right = to_text(spec.right)
        # left-associative: a binary right operand needs parentheses
        if isinstance(spec.right, (Join, Merge)):
            right = f"({right})"
        return f"{to_text(spec.left)}{op}{right}"
    raise TypeError(f"not a graph spec: {spec!r}")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: Optional[int] = None):
        raise NotationSyntaxError(message, self.pos if pos is None else pos, self.text)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def startswith(self, token: str) -> bool:
        self.skip_ws()
        return self.text.startswith(token, self.pos)

    def expect(self, token: str):
        if not self.startswith(token):
            found = self.peek() or "end of input"
            self.error(f"expected {token!r}, found {found!r}")
        self.pos += len(token)

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected integer")
        return int(self.text[start:self.pos])

    def number(self) -> float:
        self.skip_ws()
        start = self.pos
        allowed = "0123456789.eE+-"
        while self.pos < len(self.text) and self.text[self.pos] in allowed:
            # a sign is only part of the number right after an exponent marker
            if self.text[self.pos] in "+-" and (
                self.pos == start or self.text[self.pos - 1] not in "eE"
            ):
                break
            self.pos += 1
        try:
            return float(self.text[start:self.pos])
        except ValueError:
            self.error("expected number", start)

    def parse(self) -> GraphSpec:
        if not self.text.strip():
            self.error("empty notation", 0)
        node = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return node

    def expr(self) -> GraphSpec:
        node = self.term()
        while self.peek() in ("+", "/"):
            op = self.peek()
            self.pos += 1
            rhs = self.term()
            node = Join(node, rhs) if op == "+" else Merge(node, rhs)
        return node

    def term(self) -> GraphSpec:
        self.skip_ws()
        if self.startswith("("):
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if self.startswith("chain("):
            self.pos += len("chain(")
            unit = self.expr()
            self.expect(",")
            count = self.integer()
            self.expect(")")
            return Chain(unit, count)
        if self.startswith("h("):
            self.pos += 2
            child = self.expr()
            self.expect(")")
            return Handles(child)
        if self.startswith("DiC"):
            self.pos += 3
            n = self.integer()
            self.expect("(")
            a = self.integer()
            # the chord may also be written DiC8(1-5)
            if self.peek() == "-":
                self.pos += 1
            else:
                self.expect(",")
            b = self.integer()
            target = None
            if self.peek() == ",":
                self.pos += 1
                target = self.integer()
            self.expect(")")
            return DiCycle(n, a, b, target)
        if self.startswith("Pw"):
            self.pos += 2
            n = self.integer()
            self.expect(":")
            return Path(n, self.number())
        if self.startswith("P"):
            self.pos += 1
            return Path(self.integer())
        if self.startswith("C"):
            self.pos += 1
            return Cycle(self.integer())
        found = self.peek() or "end of input"
        self.error(f"expected atom, found {found!r}")


def parse(text: str) -> GraphSpec:
    """Parse graph notation into a validated expression tree.

    >>> parse("C3/C5+P1")
    Join(left=Merge(left=Cycle(n=3), right=Cycle(n=5)), right=Path(n=1, weight=None))
    >>> to_text(parse("h( C3 / C3 )"))
    'h(C3/C3)'
    """
    if not text.isascii():
        raise NotationSyntaxError("non-ASCII character", next(
            i for i, ch in enumerate(text) if not ch.isascii()), text)
    return validate(_Parser(text).parse())
