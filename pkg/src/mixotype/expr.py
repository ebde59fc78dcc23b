"""Scalar expressions in the two field variables ``u`` and ``v``.

Grammar (EBNF) accepted by :func:`parse`::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = ("-" | "+") unary | power ;
    power    = primary [ ("^" | "**") unary ] ;      (* right-associative *)
    primary  = number | "u" | "v" | func "(" expr ")" | "(" expr ")" ;
    func     = "exp" | "log" | "sqrt" | "sin" | "cos" ;
    number   = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;

``^`` binds tighter than unary minus, so ``-u^2`` is ``-(u^2)``. Exponents must
fold to an exact rational constant (``u^(3/2)``, ``v^-1``, ``u^0.5``); they are
stored as :class:`fractions.Fraction` so derivatives of half-integer powers stay
exact.

Evaluation is real-valued only. Division by zero, ``log`` of a non-positive
number, ``sqrt`` of a negative number, an even-denominator power of a negative
base and any non-finite result raise :class:`DomainError`. Powers with an odd
denominator use the real odd root, so ``v^(1/3)`` is defined for ``v < 0``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .errors import DomainError, ExprSyntaxError, MalformedExponent, UnknownIdentifier

__all__ = [
    "Expr", "Const", "Var", "Add", "Sub", "Mul", "Div", "Neg", "Pow", "Func",
    "parse", "differentiate", "evaluate", "evaluate_array", "as_expr",
    "substitute", "swap_uv", "const", "U", "V", "FUNCTIONS",
]

Number = Union[int, float, Fraction]
FUNCTIONS = ("exp", "log", "sqrt", "sin", "cos")
VARIABLES = ("u", "v")


class Expr:
    """Immutable expression node. Arithmetic operators build simplified trees."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, Fraction(exponent))

    def __str__(self):
        return _show(self, 0)

    def __call__(self, u, v):
        return evaluate(self, (u, v))

    @cached_property
    def variables(self) -> frozenset:
        return frozenset().union(*(c.variables for c in self._children()))

    def _children(self):
        return ()

    @cached_property
    def _scalar(self) -> Callable:
        return _compile(self, _SCALAR)

    @cached_property
    def _array(self) -> Callable:
        return _compile(self, _ARRAY)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Number

    @cached_property
    def variables(self):
        return frozenset()


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str

    @cached_property
    def variables(self):
        return frozenset((self.name,))


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr

    def _children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr

    def _children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def _children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr

    def _children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr

    def _children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: Fraction

    def _children(self):
        return (self.base,)


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    arg: Expr

    def _children(self):
        return (self.arg,)


U = Var("u")
V = Var("v")
ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def const(x: Number) -> Const:
    if isinstance(x, bool):
        raise TypeError("boolean is not a number")
    if isinstance(x, int):
        return Const(Fraction(x))
    if isinstance(x, float) and x.is_integer() and abs(x) < 2**53:
        return Const(Fraction(int(x)))
    return Const(x)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, str):
        return parse(x)
    if isinstance(x, (int, float, Fraction)):
        return const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


# --- simplifying constructors ------------------------------------------------
# Only constant folding and the x+0, x*0, x*1, x/1, x^0, x^1, -(-x) rules.

def _is(node, value):
    return isinstance(node, Const) and node.value == value


def _fold(op, a, b):
    try:
        return const(op(a.value, b.value))
    except (ZeroDivisionError, OverflowError):
        return None


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda x, y: x + y, a, b) or Add(a, b)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(b, Neg):
        return Sub(a, b.arg)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda x, y: x - y, a, b) or Sub(a, b)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    if isinstance(b, Neg):
        return Add(a, b.arg)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda x, y: x * y, a, b) or Mul(a, b)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return neg(b)
    if _is(b, -1):
        return neg(a)
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return _fold(lambda x, y: x / y, a, b) or Div(a, b)
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(base: Expr, exponent: Fraction) -> Expr:
    exponent = Fraction(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const) and isinstance(base.value, Fraction) and exponent.denominator == 1:
        if base.value != 0 or exponent > 0:
            return const(base.value ** int(exponent))
    if isinstance(base, Pow) and exponent.denominator == 1 and base.exponent.denominator == 1:
        return power(base.base, base.exponent * exponent)
    return Pow(base, exponent)


def func(name: str, arg: Expr) -> Expr:
    if isinstance(arg, Const):
        x = arg.value
        if name == "exp" and x == 0:
            return ONE
        if name == "log" and x == 1:
            return ZERO
        if name == "sin" and x == 0:
            return ZERO
        if name == "cos" and x == 0:
            return ONE
    return Func(name, arg)


# --- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            start = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {source[start]!r}",
                                  _byte_offset(source, start), source)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


def _byte_offset(source, index):
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok, cls=ExprSyntaxError):
        raise cls(message, _byte_offset(self.source, tok[2]), self.source)

    def expect(self, text):
        tok = self.take()
        if tok[1] != text:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            self.fail(f"expected {text!r}, found {what}", tok)
        return tok

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression", self.peek())
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(f"unexpected {tok[1]!r}", tok)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self):
        tok = self.peek()
        if tok[1] == "-":
            self.take()
            return Neg(self.unary())
        if tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[1] in ("^", "**"):
            self.take()
            start = self.peek()
            exponent = self.unary()
            try:
                value = _exact_value(exponent)
            except (ValueError, ZeroDivisionError):
                self.fail("exponent must be a constant rational number", start, MalformedExponent)
            return Pow(base, value)
        return base

    def primary(self):
        tok = self.take()
        kind, text = tok[0], tok[1]
        if kind == "num":
            try:
                return Const(Fraction(text))
            except ValueError:
                self.fail(f"bad number {text!r}", tok)
        if kind == "name":
            if text in VARIABLES:
                return Var(text)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            self.fail(f"unknown identifier {text!r}", tok, UnknownIdentifier)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        self.fail(f"unexpected {what}", tok)


def _exact_value(node) -> Fraction:
    if isinstance(node, Const):
        if isinstance(node.value, Fraction):
            return node.value
        raise ValueError("inexact constant")
    if isinstance(node, Neg):
        return -_exact_value(node.arg)
    if isinstance(node, (Add, Sub, Mul, Div)):
        a, b = _exact_value(node.left), _exact_value(node.right)
        if isinstance(node, Add):
            return a + b
        if isinstance(node, Sub):
            return a - b
        if isinstance(node, Mul):
            return a * b
        return a / b
    if isinstance(node, Pow) and node.exponent.denominator == 1:
        return _exact_value(node.base) ** int(node.exponent)
    raise ValueError("not a rational constant")


def parse(source: str) -> Expr:
    """Parse an infix expression over ``u`` and ``v`` into an expression tree."""
    if not isinstance(source, str):
        raise TypeError("expression source must be a string")
    return _Parser(source).parse()


# --- printing ----------------------------------------------------------------

def _show_const(value):
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator), (3 if value < 0 else 5)
        # prints as a division, so it needs division precedence whatever the sign
        return f"{value.numerator}/{value.denominator}", 2
    text = repr(float(value))
    return text, (3 if value < 0 else 5)


def _show(node, ctx):
    if isinstance(node, Const):
        text, prec = _show_const(node.value)
    elif isinstance(node, Var):
        text, prec = node.name, 5
    elif isinstance(node, Add):
        text, prec = f"{_show(node.left, 1)} + {_show(node.right, 2)}", 1
    elif isinstance(node, Sub):
        text, prec = f"{_show(node.left, 1)} - {_show(node.right, 2)}", 1
    elif isinstance(node, Mul):
        text, prec = f"{_show(node.left, 2)}*{_show(node.right, 3)}", 2
    elif isinstance(node, Div):
        text, prec = f"{_show(node.left, 2)}/{_show(node.right, 3)}", 2
    elif isinstance(node, Neg):
        text, prec = f"-{_show(node.arg, 3)}", 3
    elif isinstance(node, Pow):
        e = node.exponent
        exp_text = str(e.numerator) if e.denominator == 1 and e >= 0 else f"({e})"
        text, prec = f"{_show(node.base, 5)}^{exp_text}", 4
    elif isinstance(node, Func):
        text, prec = f"{node.name}({_show(node.arg, 0)})", 5
    else:
        raise TypeError(f"not an expression node: {node!r}")
    return f"({text})" if prec < ctx else text


# --- differentiation ---------------------------------------------------------

def differentiate(node: Expr, var: str) -> Expr:
    """Exact partial derivative of ``node`` with respect to ``var`` (``'u'`` or ``'v'``)."""
    if var not in VARIABLES:
        raise ValueError(f"unknown variable {var!r}")
    return _diff(node, var)


def _diff(node, var):
    if var not in node.variables:
        return ZERO
    if isinstance(node, Var):
        return ONE
    if isinstance(node, Add):
        return add(_diff(node.left, var), _diff(node.right, var))
    if isinstance(node, Sub):
        return sub(_diff(node.left, var), _diff(node.right, var))
    if isinstance(node, Neg):
        return neg(_diff(node.arg, var))
    if isinstance(node, Mul):
        a, b = node.left, node.right
        return add(mul(_diff(a, var), b), mul(a, _diff(b, var)))
    if isinstance(node, Div):
        a, b = node.left, node.right
        da, db = _diff(a, var), _diff(b, var)
        return sub(div(da, b), div(mul(a, db), power(b, Fraction(2))))
    if isinstance(node, Pow):
        p = node.exponent
        return mul(mul(const(p), power(node.base, p - 1)), _diff(node.base, var))
    if isinstance(node, Func):
        a = node.arg
        da = _diff(a, var)
        if node.name == "exp":
            outer = node
        elif node.name == "log":
            return div(da, a)
        elif node.name == "sqrt":
            return div(da, mul(const(2), node))
        elif node.name == "sin":
            outer = func("cos", a)
        elif node.name == "cos":
            outer = neg(func("sin", a))
        else:
            raise ValueError(f"unknown function {node.name!r}")
        return mul(outer, da)
    raise TypeError(f"not an expression node: {node!r}")


def substitute(node: Expr, mapping: dict) -> Expr:
    """Replace variables simultaneously, e.g. ``{'u': V, 'v': U}``."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Const):
        return node
    if isinstance(node, Add):
        return add(substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Sub):
        return sub(substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Mul):
        return mul(substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Div):
        return div(substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Neg):
        return neg(substitute(node.arg, mapping))
    if isinstance(node, Pow):
        return power(substitute(node.base, mapping), node.exponent)
    if isinstance(node, Func):
        return func(node.name, substitute(node.arg, mapping))
    raise TypeError(f"not an expression node: {node!r}")


def swap_uv(node: Expr) -> Expr:
    return substitute(node, {"u": V, "v": U})


# --- evaluation --------------------------------------------------------------
# Each tree is compiled once into nested closures, one variant working on Python
# floats (math) and one on numpy arrays.

_SCALAR = "scalar"
_ARRAY = "array"


def _compile(node, mode):
    where = str(node)
    arr = mode == _ARRAY

    if isinstance(node, Const):
        value = float(node.value)
        return lambda u, v: value
    if isinstance(node, Var):
        return (lambda u, v: u) if node.name == "u" else (lambda u, v: v)
    if isinstance(node, (Add, Sub, Mul)):
        fa, fb = node.left._fn(mode), node.right._fn(mode)
        if isinstance(node, Add):
            return lambda u, v: fa(u, v) + fb(u, v)
        if isinstance(node, Sub):
            return lambda u, v: fa(u, v) - fb(u, v)
        return lambda u, v: fa(u, v) * fb(u, v)
    if isinstance(node, Div):
        fa, fb = node.left._fn(mode), node.right._fn(mode)

        def _div(u, v):
            den = fb(u, v)
            if (np.any(den == 0)) if arr else den == 0:
                raise DomainError("division by zero", where)
            return fa(u, v) / den
        return _div
    if isinstance(node, Neg):
        fa = node.arg._fn(mode)
        return lambda u, v: -fa(u, v)
    if isinstance(node, Pow):
        return _compile_pow(node, node.base._fn(mode), arr, where)
    if isinstance(node, Func):
        return _compile_func(node.name, node.arg._fn(mode), arr, where)
    raise TypeError(f"not an expression node: {node!r}")


def _compile_pow(node, fb, arr, where):
    p = node.exponent
    num, den = p.numerator, p.denominator
    if den == 1:
        n = num

        def _ipow(u, v):
            b = fb(u, v)
            if n < 0 and ((np.any(b == 0)) if arr else b == 0):
                raise DomainError("division by zero", where)
            try:
                return b ** n if not arr else np.power(np.asarray(b, float), n)
            except OverflowError:
                raise DomainError("overflow", where) from None
        return _ipow

    q = num / den
    odd_root = den % 2 == 1
    sign_power = num % 2  # (-1)^num for a negative base under an odd root

    if arr:
        def _fpow_arr(u, v):
            b = np.asarray(fb(u, v), dtype=float)
            neg_mask = b < 0
            if np.any(neg_mask) and not odd_root:
                raise DomainError("fractional power of a negative number", where)
            if q < 0 and np.any(b == 0):
                raise DomainError("division by zero", where)
            out = np.abs(b) ** q
            if sign_power and np.any(neg_mask):
                out = np.where(neg_mask, -out, out)
            return out
        return _fpow_arr

    def _fpow(u, v):
        b = fb(u, v)
        if b < 0:
            if not odd_root:
                raise DomainError("fractional power of a negative number", where)
            r = (-b) ** q
            return -r if sign_power else r
        if b == 0 and q < 0:
            raise DomainError("division by zero", where)
        try:
            return b ** q
        except OverflowError:
            raise DomainError("overflow", where) from None
    return _fpow


def _compile_func(name, fa, arr, where):
    if name == "exp":
        if arr:
            return lambda u, v: np.exp(fa(u, v))

        def _exp(u, v):
            try:
                return math.exp(fa(u, v))
            except OverflowError:
                raise DomainError("overflow", where) from None
        return _exp
    if name == "log":
        def _log(u, v):
            a = fa(u, v)
            if (np.any(a <= 0)) if arr else a <= 0:
                raise DomainError("logarithm of a non-positive number", where)
            return np.log(a) if arr else math.log(a)
        return _log
    if name == "sqrt":
        def _sqrt(u, v):
            a = fa(u, v)
            if (np.any(a < 0)) if arr else a < 0:
                raise DomainError("square root of a negative number", where)
            return np.sqrt(a) if arr else math.sqrt(a)
        return _sqrt
    if name == "sin":
        f = np.sin if arr else math.sin
        return lambda u, v: f(fa(u, v))
    if name == "cos":
        f = np.cos if arr else math.cos
        return lambda u, v: f(fa(u, v))
    raise ValueError(f"unknown function {name!r}")


def _fn(self, mode):
    return self._scalar if mode == _SCALAR else self._array


Expr._fn = _fn


def evaluate(node: Expr, point) -> float:
    """Value of ``node`` at ``point = (u, v)`` as a Python float."""
    u, v = point
    try:
        value = node._scalar(float(u), float(v))
    except OverflowError:
        raise DomainError("overflow", str(node)) from None
    value = float(value)
    if not math.isfinite(value):
        raise DomainError("non-finite value", str(node))
    return value


def evaluate_array(node: Expr, u, v) -> np.ndarray:
    """Elementwise value of ``node`` on broadcast arrays ``u`` and ``v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        value = node._array(u, v)
    value = np.broadcast_to(np.asarray(value, dtype=float), np.broadcast(u, v).shape)
    if not np.all(np.isfinite(value)):
        raise DomainError("non-finite value", str(node))
    return value
