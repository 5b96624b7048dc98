"""
Operator expressions over qubit subsystems (grammar ``opexpr-v1``).

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := scalar | atom | '(' expr ')'
    atom   := NAME '@' INT
    scalar := ['-'] DECIMAL ['i']

NAME is one of ``I X Y Z P0 P1 Pp Pm``; ``P0``/``P1`` project onto
``|up>``/``|down>`` and ``Pp``/``Pm`` onto ``|+x>``/``|-x>``. Subsystem
indices are 1-based. A scalar is either real (``0.5``) or imaginary
(``2i``); complex constants are written as sums, ``0.5+0.5i``. A sign is
only part of a scalar where a factor is expected, so ``Z@1-1`` is a
difference and ``Z@1 + -1`` a sum.

Example::

    >>> op = evaluate(parse("Z@1 * 0.5*(I@2 + Z@2)"), [2, 2])
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .hilbert import OperatorMatrix, ShapeLike, as_shape, embed, pauli, qubit_projector

GRAMMAR_VERSION = "opexpr-v1"

NAMES = ("I", "X", "Y", "Z", "P0", "P1", "Pp", "Pm")

_LOCAL = {
    "I": lambda: pauli("I"),
    "X": lambda: pauli("X"),
    "Y": lambda: pauli("Y"),
    "Z": lambda: pauli("Z"),
    "P0": lambda: qubit_projector("up"),
    "P1": lambda: qubit_projector("down"),
    "Pp": lambda: qubit_projector("+x"),
    "Pm": lambda: qubit_projector("-x"),
}


class ParseError(ValueError):
    def __init__(self, position: int, message: str, expected=()):
        self.position = position
        self.message = message
        self.expected = frozenset(expected)
        hint = f" (expected {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"at offset {position}: {message}{hint}")


# -- syntax tree -------------------------------------------------------------

@dataclass(frozen=True)
class Scalar:
    value: float
    imaginary: bool = False

    def __str__(self):
        return repr(self.value) + ("i" if self.imaginary else "")


@dataclass(frozen=True)
class Atom:
    name: str
    index: int

    def __str__(self):
        return f"{self.name}@{self.index}"


@dataclass(frozen=True)
class Group:
    inner: "Node"

    def __str__(self):
        return f"({self.inner})"


@dataclass(frozen=True)
class Product:
    left: "Node"
    right: "Node"

    def __str__(self):
        return f"{self.left} * {self.right}"


@dataclass(frozen=True)
class Sum:
    left: "Node"
    op: str
    right: "Node"

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


Node = Union[Scalar, Atom, Group, Product, Sum]


def pretty(node: Node) -> str:
    """Text form of a tree; parsing it gives back an identical tree."""
    return str(node)


# -- parser ------------------------------------------------------------------

_NUMBER = re.compile(r"-?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?i?")
_NAME = re.compile(r"P[01pm]|[IXYZ]")
_INT = re.compile(r"\d+")
_FACTOR_START = {"number", "name", "'('"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def fail(self, message, expected=()):
        raise ParseError(min(self.pos, len(self.text)), message, expected)

    def parse(self) -> Node:
        if not self.text.strip():
            self.pos = len(self.text)
            self.fail("empty expression", _FACTOR_START)
        node = self.expr()
        if self.peek():
            self.fail(f"unexpected {self.peek()!r}", {"'+'", "'-'", "'*'", "end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            node = Sum(node, op, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek() == "*":
            self.pos += 1
            node = Product(node, self.factor())
        return node

    def factor(self) -> Node:
        c = self.peek()
        if c == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                self.fail("unclosed parenthesis", {"')'"})
            self.pos += 1
            return Group(inner)
        m = _NUMBER.match(self.text, self.pos)
        if m:
            tok = m.group()
            value = float(tok.rstrip("i"))
            if not math.isfinite(value):
                self.fail("number out of range", {"finite number"})
            self.pos = m.end()
            return Scalar(value, tok.endswith("i"))
        m = _NAME.match(self.text, self.pos)
        if m:
            start, name = self.pos, m.group()
            self.pos = m.end()
            if self.pos < len(self.text) and self.text[self.pos].isalnum():
                self.pos = start
                self.fail("unknown operator name", set(NAMES))
            if self.peek() != "@":
                self.fail("operator name must be followed by '@'", {"'@'"})
            self.pos += 1
            self.skip()
            m = _INT.match(self.text, self.pos)
            if not m:
                self.fail("missing subsystem index", {"integer"})
            self.pos = m.end()
            index = int(m.group())
            if index < 1:
                self.pos = m.start()
                self.fail("subsystem indices start at 1", {"integer >= 1"})
            return Atom(name, index)
        if not c:
            self.fail("unexpected end of input", _FACTOR_START)
        self.fail(f"unexpected {c!r}", _FACTOR_START)


def parse(text: str) -> Node:
    """Parse an operator expression; raises :class:`ParseError` on the first violation."""
    return _Parser(text).parse()


# -- evaluation --------------------------------------------------------------

def atoms(node: Node):
    if isinstance(node, Atom):
        yield node
    elif isinstance(node, Group):
        yield from atoms(node.inner)
    elif isinstance(node, (Product, Sum)):
        yield from atoms(node.left)
        yield from atoms(node.right)


def evaluate(node: Node, dims: ShapeLike) -> OperatorMatrix:
    """Matrix of ``node`` on the space ``dims``.

    Atoms are padded with identities; ``*`` is the matrix product.
    """
    shape = as_shape(dims)
    for a in atoms(node):
        if a.index > shape.n_subsystems:
            raise IndexError(
                f"{a} refers to subsystem {a.index}, space has {shape.n_subsystems}")
        if shape.dims[a.index - 1] != 2:
            raise ValueError(f"{a} needs a qubit, subsystem {a.index} has dimension "
                             f"{shape.dims[a.index - 1]}")
    return OperatorMatrix(_eval(node, shape), shape)


def _eval(node: Node, shape) -> np.ndarray:
    if isinstance(node, Scalar):
        v = 1j * node.value if node.imaginary else node.value
        return v * np.eye(shape.total_dim, dtype=complex)
    if isinstance(node, Atom):
        return embed(_LOCAL[node.name](), node.index - 1, shape).entries
    if isinstance(node, Group):
        return _eval(node.inner, shape)
    if isinstance(node, Product):
        return _eval(node.left, shape) @ _eval(node.right, shape)
    if isinstance(node, Sum):
        left, right = _eval(node.left, shape), _eval(node.right, shape)
        return left + right if node.op == "+" else left - right
    raise TypeError(f"not an expression node: {node!r}")


def operator(text: str, dims: ShapeLike) -> OperatorMatrix:
    return evaluate(parse(text), dims)

