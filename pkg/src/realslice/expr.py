"""Expression trees in one complex variable z with real coefficients.

The grammar is a small calculator language: reals, the named constants
``pi`` and ``e``, the variable ``z``, the binary operators ``+ - * / ^``
(``^`` only with constant real exponents), unary minus, and a fixed set of
analytic functions applied with parentheses, ``sin(z)``.  Imaginary
literals are rejected on purpose: with real coefficients every expression
satisfies f(conj z) = conj f(z), and the rest of the pipeline leans on
that symmetry.

Evaluation is plain complex arithmetic with two failure modes that are
reported, never saturated: domain errors (log of zero, division by zero)
and magnitude overflow past ``MAGNITUDE_CAP``.  A vectorised twin of the
scalar evaluator works on numpy arrays and poisons failed lattice points
with NaN instead of raising.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

# Values with |v| beyond this are treated as poles/overflow by every consumer.
MAGNITUDE_CAP = 1e12


class ExprError(Exception):
    pass


class ParseError(ExprError):
    """Syntax/semantic parse failure; ``offset`` is a 0-based byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(ExprError):
    pass


class EvalDomainError(EvalError):
    pass


class EvalOverflowError(EvalError):
    pass


# ---------------------------------------------------------------------------
# Tree nodes


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class NamedConst:
    name: str  # "pi" | "e"


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Fn:
    name: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" | "-" | "*" | "/"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: "Expr"  # constant subtree, enforced by the parser


Expr = Union[Const, NamedConst, Var, Neg, Fn, BinOp, Pow]

Z = Var()

NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}

FUNCTION_NAMES = (
    "sin", "cos", "tan", "sec", "csc", "cot",
    "sinh", "cosh", "tanh", "sech", "csch", "coth",
    "exp", "ln", "sqrt",
)


def is_constant(e: Expr) -> bool:
    """True when the subtree contains no occurrence of z."""
    match e:
        case Const() | NamedConst():
            return True
        case Var():
            return False
        case Neg(arg):
            return is_constant(arg)
        case Fn(_, arg):
            return is_constant(arg)
        case BinOp(_, left, right):
            return is_constant(left) and is_constant(right)
        case Pow(base, exponent):
            return is_constant(base) and is_constant(exponent)
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    value: float
    offset: int  # byte offset into the UTF-8 encoding of the source


_OP_CHARS = set("+-*/^()")
_DIGITS = set("0123456789")
_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    offset = 0  # running byte offset
    n = len(text)
    while i < n:
        ch = text[i]
        blen = len(ch.encode("utf-8"))
        if ch.isspace():
            i += 1
            offset += blen
            continue
        if ch in _OP_CHARS:
            tokens.append(_Token("op", ch, 0.0, offset))
            i += 1
            offset += blen
            continue
        if ch in _DIGITS:
            start, start_off = i, offset
            while i < n and text[i] in _DIGITS:
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i] in _DIGITS:
                    i += 1
            # exponent part only when followed by digits (so "2*e" still lexes)
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j] in _DIGITS:
                    i = j
                    while i < n and text[i] in _DIGITS:
                        i += 1
            lit = text[start:i]
            tokens.append(_Token("num", lit, float(lit), start_off))
            offset += len(lit.encode("utf-8"))
            continue
        if ch in _IDENT_START:
            start, start_off = i, offset
            while i < n and (text[i] in _IDENT_START or text[i] in _DIGITS):
                i += 1
            name = text[start:i]
            tokens.append(_Token("ident", name, 0.0, start_off))
            offset += len(name.encode("utf-8"))
            continue
        raise ParseError(f"unexpected character {ch!r}", offset)
    tokens.append(_Token("end", "", 0.0, offset))
    return tokens


# ---------------------------------------------------------------------------
# Parser (precedence climbing)

_BP_ADD = 10
_BP_MUL = 20
_BP_NEG = 30
_BP_POW = 40


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ParseError(f"expected {op!r}", tok.offset)
        self.advance()

    def parse_expr(self, min_bp: int) -> Expr:
        left = self.parse_atom()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in "+-*/^":
                break
            op = tok.text
            if op in "+-":
                bp = _BP_ADD
            elif op in "*/":
                bp = _BP_MUL
            else:
                bp = _BP_POW
            if bp < min_bp:
                break
            self.advance()
            if op == "^":
                # right-associative
                right = self.parse_expr(_BP_POW)
                if not is_constant(right):
                    raise ParseError("exponent must be a constant", tok.offset)
                left = Pow(left, right)
            else:
                right = self.parse_expr(bp + 1)
                left = BinOp(op, left, right)
        return left

    def parse_atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            return Const(tok.value)
        if tok.kind == "op" and tok.text == "-":
            return Neg(self.parse_expr(_BP_NEG + 1))
        if tok.kind == "op" and tok.text == "(":
            inner = self.parse_expr(0)
            self.expect_op(")")
            return inner
        if tok.kind == "ident":
            name = tok.text
            if name == "z":
                return Z
            if name in NAMED_CONSTANTS:
                return NamedConst(name)
            if name in ("i", "j", "I"):
                raise ParseError("imaginary literals are not supported", tok.offset)
            if name in FUNCTION_NAMES:
                self.expect_op("(")
                arg = self.parse_expr(0)
                self.expect_op(")")
                return Fn(name, arg)
            if name == "abs":
                raise ParseError("abs is not supported (not complex-analytic)", tok.offset)
            raise ParseError(f"unknown identifier {name!r}", tok.offset)
        if tok.kind == "end":
            raise ParseError("unexpected end of input", tok.offset)
        raise ParseError(f"unexpected token {tok.text!r}", tok.offset)


def parse(text: str) -> Expr:
    """Parse source text into an expression tree.

    Raises ParseError (with a 0-based byte offset) on syntax errors,
    unknown identifiers, imaginary literals, and non-constant exponents.
    """
    if not text or text.isspace():
        raise ParseError("empty expression", 0)
    p = _Parser(text)
    result = p.parse_expr(0)
    tok = p.peek()
    if tok.kind != "end":
        raise ParseError(f"unexpected token {tok.text!r}", tok.offset)
    return result


# ---------------------------------------------------------------------------
# Pretty printer

_PREC_ATOM = 50


def _prec(e: Expr) -> int:
    match e:
        case BinOp("+" | "-", _, _):
            return _BP_ADD
        case BinOp(_, _, _):
            return _BP_MUL
        case Neg(_):
            return _BP_NEG
        case Pow(_, _):
            return _BP_POW
        case _:
            return _PREC_ATOM


def _fmt_float(v: float) -> str:
    s = repr(v)
    return s[:-2] if s.endswith(".0") else s


def to_text(e: Expr) -> str:
    """Canonical text form; parsing it back yields a structurally equal tree.

    (For parser-produced trees.  Derivatives may contain negative literal
    constants, which print as unary minus and re-parse to the equivalent
    Neg form.)
    """

    def wrap(child: Expr, need: int) -> str:
        s = to_text(child)
        return f"({s})" if _prec(child) < need else s

    match e:
        case Const(v):
            return _fmt_float(v) if v >= 0 else "-" + _fmt_float(-v)
        case NamedConst(name):
            return name
        case Var():
            return "z"
        case Neg(arg):
            return "-" + wrap(arg, _BP_POW)
        case Fn(name, arg):
            return f"{name}({to_text(arg)})"
        case BinOp(op, left, right):
            bp = _BP_ADD if op in "+-" else _BP_MUL
            ls = wrap(left, bp)
            rs = wrap(right, bp + 1)
            return f"{ls} {op} {rs}" if op in "+-" else f"{ls}{op}{rs}"
        case Pow(base, exponent):
            bs = wrap(base, _PREC_ATOM)
            es = wrap(exponent, _PREC_ATOM)
            return f"{bs}^{es}"
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Scalar evaluation


def _check(v: complex) -> complex:
    re, im = v.real, v.imag
    if math.isnan(re) or math.isnan(im):
        raise EvalDomainError("evaluation produced NaN")
    if abs(v) > MAGNITUDE_CAP:
        raise EvalOverflowError(f"magnitude exceeds cap {MAGNITUDE_CAP:g}")
    return v


def _sdiv(a: complex, b: complex) -> complex:
    try:
        return a / b
    except ZeroDivisionError:
        raise EvalDomainError("division by zero") from None


_SCALAR_FUNCS: dict[str, Callable[[complex], complex]] = {
    "sin": cmath.sin,
    "cos": cmath.cos,
    "tan": cmath.tan,
    "sec": lambda z: _sdiv(1.0, cmath.cos(z)),
    "csc": lambda z: _sdiv(1.0, cmath.sin(z)),
    "cot": lambda z: _sdiv(cmath.cos(z), cmath.sin(z)),
    "sinh": cmath.sinh,
    "cosh": cmath.cosh,
    "tanh": cmath.tanh,
    "sech": lambda z: _sdiv(1.0, cmath.cosh(z)),
    "csch": lambda z: _sdiv(1.0, cmath.sinh(z)),
    "coth": lambda z: _sdiv(cmath.cosh(z), cmath.sinh(z)),
    "exp": cmath.exp,
    "ln": cmath.log,
    "sqrt": cmath.sqrt,
}


def constant_value(e: Expr) -> float:
    """Real value of a constant subtree."""
    v = evaluate(e, 0j)
    return v.real


def _pow_scalar(base: complex, c: float) -> complex:
    if c == int(c) and abs(c) <= 1024:
        n = int(c)
        if n == 0:
            return 1.0 + 0j
        acc = 1.0 + 0j
        b = base
        k = abs(n)
        while k:  # repeated multiplication (binary)
            if k & 1:
                acc *= b
            k >>= 1
            if k:
                b *= b
        return acc if n > 0 else _sdiv(1.0, acc)
    if base == 0:
        if c > 0:
            return 0j
        raise EvalDomainError("zero to a non-positive non-integer power")
    return cmath.exp(c * cmath.log(base))


def evaluate(e: Expr, z: complex) -> complex:
    """Value of the expression at z.

    Raises EvalDomainError on poles/invalid arguments and
    EvalOverflowError when any node's magnitude exceeds MAGNITUDE_CAP.
    """
    match e:
        case Const(v):
            return complex(v)
        case NamedConst(name):
            return complex(NAMED_CONSTANTS[name])
        case Var():
            return complex(z)
        case Neg(arg):
            return -evaluate(arg, z)
        case Fn(name, arg):
            a = evaluate(arg, z)
            if name == "ln" and a == 0:
                raise EvalDomainError("ln of zero")
            try:
                v = _SCALAR_FUNCS[name](a)
            except (OverflowError, ValueError) as exc:
                raise EvalOverflowError(f"{name} overflow") from exc
            return _check(v)
        case BinOp(op, left, right):
            a = evaluate(left, z)
            b = evaluate(right, z)
            if op == "+":
                v = a + b
            elif op == "-":
                v = a - b
            elif op == "*":
                v = a * b
            else:
                v = _sdiv(a, b)
            return _check(v)
        case Pow(base, exponent):
            b = evaluate(base, z)
            c = constant_value(exponent)
            try:
                v = _pow_scalar(b, c)
            except OverflowError as exc:
                raise EvalOverflowError("power overflow") from exc
            return _check(v)
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Vectorised evaluation

_VEC_FUNCS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sec": lambda a: 1.0 / np.cos(a),
    "csc": lambda a: 1.0 / np.sin(a),
    "cot": lambda a: np.cos(a) / np.sin(a),
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "sech": lambda a: 1.0 / np.cosh(a),
    "csch": lambda a: 1.0 / np.sinh(a),
    "coth": lambda a: np.cosh(a) / np.sinh(a),
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
}

_NANC = complex(math.nan, math.nan)


def _poison(v: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(v.real) | ~np.isfinite(v.imag)
    good = ~bad
    bad[good] |= np.abs(v[good]) > MAGNITUDE_CAP
    if bad.any():
        v = v.copy() if not v.flags.writeable else v
        v[bad] = _NANC
    return v


def _eval_vec(e: Expr, z: np.ndarray) -> np.ndarray:
    match e:
        case Const(v):
            return np.full(z.shape, complex(v))
        case NamedConst(name):
            return np.full(z.shape, complex(NAMED_CONSTANTS[name]))
        case Var():
            return z.astype(np.complex128, copy=True)
        case Neg(arg):
            return -_eval_vec(arg, z)
        case Fn(name, arg):
            a = _eval_vec(arg, z)
            if name == "ln":
                a = np.where(a == 0, _NANC, a)
            return _poison(_VEC_FUNCS[name](a))
        case BinOp(op, left, right):
            a = _eval_vec(left, z)
            b = _eval_vec(right, z)
            if op == "+":
                v = a + b
            elif op == "-":
                v = a - b
            elif op == "*":
                v = a * b
            else:
                v = np.where(b == 0, _NANC, a / np.where(b == 0, 1, b))
            return _poison(v)
        case Pow(base, exponent):
            b = _eval_vec(base, z)
            c = constant_value(exponent)
            if c == int(c) and abs(c) <= 1024:
                n = int(c)
                acc = np.ones(z.shape, dtype=np.complex128)
                bb = b
                k = abs(n)
                while k:
                    if k & 1:
                        acc = acc * bb
                    k >>= 1
                    if k:
                        bb = bb * bb
                if n < 0:
                    acc = np.where(acc == 0, _NANC, 1.0 / np.where(acc == 0, 1, acc))
                return _poison(acc)
            v = np.where(b == 0, _NANC, np.exp(c * np.log(np.where(b == 0, 1, b))))
            return _poison(v)
    raise TypeError(f"not an Expr: {e!r}")


def eval_vec(e: Expr, z: np.ndarray) -> np.ndarray:
    """Evaluate over a complex128 array; failed points become NaN+NaNj.

    A point is poisoned exactly when the scalar evaluator would raise
    there (domain error, division by zero, or magnitude past the cap).
    """
    with np.errstate(all="ignore"):
        return _eval_vec(e, np.asarray(z, dtype=np.complex128))


# ---------------------------------------------------------------------------
# Differentiation


def _mul(a: Expr, b: Expr) -> Expr:
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    return BinOp("/", a, b)


def _fn_derivative(name: str, u: Expr) -> Expr:
    match name:
        case "sin":
            return Fn("cos", u)
        case "cos":
            return Neg(Fn("sin", u))
        case "tan":
            return Pow(Fn("sec", u), Const(2.0))
        case "sec":
            return _mul(Fn("sec", u), Fn("tan", u))
        case "csc":
            return Neg(_mul(Fn("csc", u), Fn("cot", u)))
        case "cot":
            return Neg(Pow(Fn("csc", u), Const(2.0)))
        case "sinh":
            return Fn("cosh", u)
        case "cosh":
            return Fn("sinh", u)
        case "tanh":
            return Pow(Fn("sech", u), Const(2.0))
        case "sech":
            return Neg(_mul(Fn("sech", u), Fn("tanh", u)))
        case "csch":
            return Neg(_mul(Fn("csch", u), Fn("coth", u)))
        case "coth":
            return Neg(Pow(Fn("csch", u), Const(2.0)))
        case "exp":
            return Fn("exp", u)
        case "ln":
            return _div(Const(1.0), u)
        case "sqrt":
            return _div(Const(1.0), _mul(Const(2.0), Fn("sqrt", u)))
    raise ValueError(f"unknown function {name!r}")


def differentiate(e: Expr) -> Expr:
    """Exact symbolic derivative d/dz.  No simplification is promised."""
    match e:
        case Const(_) | NamedConst(_):
            return Const(0.0)
        case Var():
            return Const(1.0)
        case Neg(arg):
            return Neg(differentiate(arg))
        case Fn(name, arg):
            return _mul(_fn_derivative(name, arg), differentiate(arg))
        case BinOp("+", left, right):
            return BinOp("+", differentiate(left), differentiate(right))
        case BinOp("-", left, right):
            return BinOp("-", differentiate(left), differentiate(right))
        case BinOp("*", left, right):
            return BinOp(
                "+",
                _mul(differentiate(left), right),
                _mul(left, differentiate(right)),
            )
        case BinOp("/", left, right):
            num = BinOp(
                "-",
                _mul(differentiate(left), right),
                _mul(left, differentiate(right)),
            )
            return _div(num, Pow(right, Const(2.0)))
        case Pow(base, exponent):
            c = constant_value(exponent)
            if c == 0:
                return Const(0.0)
            return _mul(
                _mul(Const(c), Pow(base, Const(c - 1.0))),
                differentiate(base),
            )
    raise TypeError(f"not an Expr: {e!r}")
