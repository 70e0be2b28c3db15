"""
Recursive descent parser for symbol expressions.

Grammar (whitespace insignificant):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('+'|'-') factor | atom ('^' signed_int)?
    atom   := number | 'i' | 'r' | 'z' digit+ | 'conj(' expr ')' | 'exp(' expr ')'
            | 'abs(' expr ')' | 're(' expr ')' | 'im(' expr ')' | '(' expr ')'

'r' is the Euclidean norm |z|. Besides evaluation, every node reports the
phase charges of its monomial terms: under z_j -> e^{iθ_j} z_j a term with
charge vector c picks up e^{i<c,θ>}. Radiality and degree shifts are read
off these charges.
"""
import re
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Tuple

import numpy as np

from modules.errors import SymbolArityError, SymbolParseError

Charges = Optional[FrozenSet[Tuple[int, ...]]]

FUNCTIONS = ("conj", "exp", "abs", "re", "im")

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z]+\d*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    stripped_end = len(text.rstrip())
    while position < stripped_end:
        match = _TOKEN_RE.match(text, position)
        if not match or match.end() == position:
            offset = position + len(text[position:]) - len(text[position:].lstrip())
            raise SymbolParseError(f"unexpected character {text[offset]!r}", offset)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


def _add(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def _negate(charges: Charges) -> Charges:
    if charges is None:
        return None
    return frozenset(tuple(-x for x in c) for c in charges)


def _minkowski(left: Charges, right: Charges) -> Charges:
    if left is None or right is None:
        return None
    return frozenset(_add(a, b) for a in left for b in right)


class Node:
    """Expression tree node."""

    def evaluate(self, points: np.ndarray, radius: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def charges(self, d: int) -> Charges:
        raise NotImplementedError

    def children(self) -> Tuple["Node", ...]:
        return ()

    def walk(self):
        yield self
        for child in self.children():
            yield from child.walk()


@dataclass(frozen=True)
class Constant(Node):
    value: complex

    def evaluate(self, points, radius):
        return np.full(radius.shape, self.value, dtype=complex)

    def charges(self, d):
        return frozenset({(0,) * d})


@dataclass(frozen=True)
class Coordinate(Node):
    index: int

    def evaluate(self, points, radius):
        return points[:, self.index - 1]

    def charges(self, d):
        return frozenset({tuple(1 if j == self.index - 1 else 0 for j in range(d))})


@dataclass(frozen=True)
class Radius(Node):
    def evaluate(self, points, radius):
        return radius.astype(complex)

    def charges(self, d):
        return frozenset({(0,) * d})


@dataclass(frozen=True)
class Call(Node):
    name: str
    argument: Node

    def evaluate(self, points, radius):
        inner = self.argument.evaluate(points, radius)
        if self.name == "conj":
            return np.conj(inner)
        if self.name == "exp":
            return np.exp(inner)
        if self.name == "abs":
            return np.abs(inner).astype(complex)
        if self.name == "re":
            return inner.real.astype(complex)
        return inner.imag.astype(complex)

    def charges(self, d):
        inner = self.argument.charges(d)
        zero = frozenset({(0,) * d})
        if self.name == "conj":
            return _negate(inner)
        if self.name == "abs":
            # |e^{i<c,θ>} h| = |h| only for a single charge c
            return zero if inner is not None and len(inner) == 1 else None
        if self.name == "exp":
            return zero if inner == zero else None
        if inner is None:
            return None
        return inner | _negate(inner)

    def children(self):
        return (self.argument,)


@dataclass(frozen=True)
class Negate(Node):
    operand: Node

    def evaluate(self, points, radius):
        return -self.operand.evaluate(points, radius)

    def charges(self, d):
        return self.operand.charges(d)

    def children(self):
        return (self.operand,)


@dataclass(frozen=True)
class BinaryOp(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, points, radius):
        a = self.left.evaluate(points, radius)
        b = self.right.evaluate(points, radius)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def charges(self, d):
        left = self.left.charges(d)
        right = self.right.charges(d)
        if left is None or right is None:
            return None
        if self.op in "+-":
            return left | right
        if self.op == "*":
            return _minkowski(left, right)
        # a quotient keeps finitely many charges only for a single-charge divisor
        if len(right) != 1:
            return None
        return _minkowski(left, _negate(right))

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Power(Node):
    base: Node
    exponent: int

    def evaluate(self, points, radius):
        return self.base.evaluate(points, radius) ** self.exponent

    def charges(self, d):
        base = self.base.charges(d)
        if base is None:
            return None
        if self.exponent < 0:
            if len(base) != 1:
                return None
            (c,) = tuple(base)
            return frozenset({tuple(self.exponent * x for x in c)})
        result = frozenset({(0,) * d})
        for _ in range(self.exponent):
            result = _minkowski(result, base)
        return result

    def children(self):
        return (self.base,)


class Parser:
    """Builds a Node tree from symbol text for a given dimension d."""

    def __init__(self, text: str, d: int):
        self.text = text
        self.d = d
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def _expect(self, text: str) -> Token:
        if self.current.text != text:
            found = self.current.text or "end of input"
            raise SymbolParseError(f"expected {text!r}, found {found!r}", self.current.position)
        return self._advance()

    def parse(self) -> Node:
        if self.current.kind == "end":
            raise SymbolParseError("empty expression", 0)
        node = self.expr()
        if self.current.kind != "end":
            raise SymbolParseError(f"unexpected {self.current.text!r}", self.current.position)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.text in ("+", "-") and self.current.kind == "op":
            op = self._advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.current.text in ("*", "/") and self.current.kind == "op":
            op = self._advance().text
            node = BinaryOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.current.kind == "op" and self.current.text in ("+", "-"):
            sign = self._advance().text
            operand = self.factor()
            return Negate(operand) if sign == "-" else operand
        node = self.atom()
        if self.current.text == "^":
            self._advance()
            node = Power(node, self.signed_int())
        return node

    def signed_int(self) -> int:
        sign = 1
        if self.current.text in ("+", "-"):
            sign = -1 if self._advance().text == "-" else 1
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            raise SymbolParseError("exponent must be an integer", token.position)
        self._advance()
        return sign * int(token.text)

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Constant(complex(float(token.text)))
        if token.kind == "op" and token.text == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        if token.kind == "name":
            self._advance()
            name = token.text
            if name in FUNCTIONS:
                self._expect("(")
                argument = self.expr()
                self._expect(")")
                return Call(name, argument)
            if name == "i":
                return Constant(1j)
            if name == "r":
                return Radius()
            if name[0] == "z" and name[1:].isdigit():
                index = int(name[1:])
                if index < 1 or index > self.d:
                    raise SymbolArityError(f"variable {name} is out of range for d={self.d}", token.position)
                return Coordinate(index)
            raise SymbolParseError(f"unknown name {name!r}", token.position)
        found = token.text or "end of input"
        raise SymbolParseError(f"unexpected {found!r}", token.position)


def parse_expression(text: str, d: int) -> Node:
    return Parser(text, d).parse()
