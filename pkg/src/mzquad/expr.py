"""Arithmetic expressions in ``x`` and ``y``.

Grammar, loosest binding first::

    expr    := expr ('+' | '-') expr          left associative
             | expr ('*' | '/') expr          left associative
             | '-' expr                       unary minus
             | expr '^' expr                  right associative
             | NUMBER | 'x' | 'y' | FUNC '(' expr ')' | '(' expr ')'

``FUNC`` is one of ``sin cos exp sqrt abs log``.  Numbers are decimal with an
optional exponent (``2``, ``.5``, ``1.5e-3``).  ``-x^2`` is ``-(x^2)`` and
``2^-1`` is ``2^(-1)``.  Implicit multiplication (``2x``) is rejected.

Evaluation is vectorized over numpy arrays and follows IEEE semantics:
``log(-1)`` is NaN and ``x/0`` is infinite rather than an error.
"""

from dataclasses import dataclass
import re

import numpy as np

from .errors import ParseError

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "log": np.log,
}
VARIABLES = ("x", "y")


class Expr:
    def __call__(self, x, y):
        with np.errstate(all="ignore"):
            return evaluate(self, np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, ident, op, end
    text: str
    offset: int  # byte offset into the UTF-8 source


def tokenize(src):
    tokens = []
    pos = 0
    byte = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", byte)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), byte))
        byte += len(m.group().encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte))
    return tokens


# -- Pratt parser ------------------------------------------------------------

_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY = 30


class _Parser:
    def __init__(self, src):
        self.tokens = tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text, what):
        tok = self.advance()
        if tok.text != text or tok.kind not in ("op",):
            raise ParseError(f"expected {what}, found {_describe(tok)}", tok.offset)
        return tok

    def lbp(self, tok):
        return _INFIX.get(tok.text, 0) if tok.kind == "op" else 0

    def expression(self, rbp=0):
        left = self.nud(self.advance())
        while rbp < self.lbp(self.peek()):
            tok = self.advance()
            bp = _INFIX[tok.text]
            # right associativity for '^'
            right = self.expression(bp - 1 if tok.text == "^" else bp)
            left = BinOp(tok.text, left, right)
        return left

    def nud(self, tok):
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "ident":
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                self.expect("(", f"'(' after function {tok.text}")
                arg = self.expression()
                self.expect(")", "')' closing the function argument")
                return Call(tok.text, arg)
            raise ParseError(f"unknown identifier {tok.text!r}", tok.offset)
        if tok.kind == "op" and tok.text == "-":
            return Neg(self.expression(_UNARY))
        if tok.kind == "op" and tok.text == "(":
            inner = self.expression()
            self.expect(")", "')'")
            return inner
        raise ParseError(f"expected a number, variable, function or '(', found {_describe(tok)}", tok.offset)


def _describe(tok):
    return "end of input" if tok.kind == "end" else repr(tok.text)


def parse(src):
    """Parse ``src`` into an expression tree."""
    if isinstance(src, bytes):
        src = src.decode("utf-8")
    p = _Parser(src)
    tree = p.expression()
    tok = p.peek()
    if tok.kind != "end":
        raise ParseError(f"expected an operator or end of input, found {_describe(tok)}", tok.offset)
    return tree


# -- evaluation and printing -------------------------------------------------


def evaluate(e, x, y):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x if e.name == "x" else y
    if isinstance(e, Neg):
        return -evaluate(e.operand, x, y)
    if isinstance(e, Call):
        return FUNCTIONS[e.func](evaluate(e.arg, x, y))
    a = evaluate(e.left, x, y)
    b = evaluate(e.right, x, y)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        return np.divide(a, b)
    return np.power(np.asarray(a, dtype=float), b)


def _prec(e):
    if isinstance(e, BinOp):
        return {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}[e.op]
    if isinstance(e, Neg):
        return 3
    return 5


def to_text(e):
    """Text that parses back to the same tree, with minimal parentheses."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        return f"-({inner})" if _prec(e.operand) < 3 else f"-{inner}"
    prec = _prec(e)
    left = to_text(e.left)
    right = to_text(e.right)
    if _prec(e.left) < prec or (e.op == "^" and _prec(e.left) <= prec):
        left = f"({left})"
    if _prec(e.right) < prec or (e.op != "^" and _prec(e.right) == prec):
        right = f"({right})"
    return f"{left}{e.op}{right}"


# -- built-in integrands -----------------------------------------------------


def f1(x, y):
    return (x + 2 * y - 7) ** 2 + (2 * x + y - 5) ** 2


def f2(x, y):
    return 100 * np.sqrt(np.abs(y - 0.01 * x**2)) + 0.01 * np.abs(x + 10)


def f3(x, y):
    return np.sin(x + y) + (x - y) ** 2 - 1.5 * x + 2.5 * y + 1


BUILTINS = {
    "f1": (f1, "(x+2*y-7)^2+(2*x+y-5)^2"),
    "f2": (f2, "100*sqrt(abs(y-0.01*x^2))+0.01*abs(x+10)"),
    "f3": (f3, "sin(x+y)+(x-y)^2-1.5*x+2.5*y+1"),
}


def resolve(spec):
    """Integrand for a built-in name (``f1``, ``f2``, ``f3``) or an expression."""
    if spec in BUILTINS:
        return BUILTINS[spec][0]
    return parse(spec)
