"""A small closed expression language over scalar doubles.

Grammar (whitespace insensitive):

    sum     := product (('+' | '-') product)*
    product := signed (('*' | '/') signed)*
    signed  := '-' signed | power
    power   := atom ('^' signed)?          right associative
    atom    := NUMBER | IDENT | IDENT '(' sum ')' | '(' sum ')'

'^' binds tighter than a unary minus on its right operand, so -x^2 reads as
-(x^2) while 2^-3 reads as 2^(-3).  Unary '+' is not part of the language.
The reserved identifiers pi and e fold to their double precision values at
parse time.  Everything else must be one of the nine function names or a
declared variable.

Trees are immutable dataclasses and compare structurally, which is what the
round trip guarantee is stated against: to_text of a parsed tree reparses to
an equal tree, and to_text(parse(to_text(t))) == to_text(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .errors import DomainError, ParseError, UnboundVariable

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Unary",
    "Binary",
    "parse",
    "evaluate",
    "differentiate",
    "to_text",
    "substitute",
    "variables_of",
    "is_constant",
    "fold",
    "as_expr",
]

FUNCTIONS = ("exp", "ln", "sin", "cos", "tan", "atan", "sqrt", "abs", "sign")
CONSTANTS = {"pi": math.pi, "e": math.e}
BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' or a function name
    child: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Unary, Binary]


# ---------------------------------------------------------------------------
# tokenizer / parser


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            tokens.append(("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        if c in "+-*/^()":
            tokens.append((c, c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: frozenset[str]) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.variables = variables

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return self.advance()

    def parse(self) -> Expr:
        e = self.sum()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return e

    def sum(self) -> Expr:
        e = self.product()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            e = Binary(op, e, self.product())
        return e

    def product(self) -> Expr:
        e = self.signed()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            e = Binary(op, e, self.signed())
        return e

    def signed(self) -> Expr:
        if self.peek()[0] == "-":
            self.advance()
            return Unary("neg", self.signed())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            return Binary("^", base, self.signed())
        return base

    def atom(self) -> Expr:
        kind, textval, pos = self.peek()
        if kind == "num":
            self.advance()
            return Num(float(textval))
        if kind == "(":
            self.advance()
            e = self.sum()
            self.expect(")")
            return e
        if kind == "ident":
            self.advance()
            if textval in FUNCTIONS:
                self.expect("(")
                arg = self.sum()
                self.expect(")")
                return Unary(textval, arg)
            if textval in CONSTANTS:
                return Num(CONSTANTS[textval])
            if textval in self.variables:
                return Var(textval)
            raise ParseError(f"unknown identifier {textval!r}", pos)
        raise ParseError(f"expected a value, found {textval or 'end of input'!r}", pos)


def parse(text: str, variables: Iterable[str] = ("x",)) -> Expr:
    """Parse text over the given variable names."""
    return _Parser(text, frozenset(variables)).parse()


def as_expr(value: "Expr | str | float | int", variables: Iterable[str] = ("x",)) -> Expr:
    """Coerce text or a number to an expression tree."""
    if isinstance(value, (Num, Var, Unary, Binary)):
        return value
    if isinstance(value, str):
        return parse(value, variables)
    return Num(float(value))


# ---------------------------------------------------------------------------
# evaluation


def _sign(v: float) -> float:
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


def _pow_checked(base: float, exponent: float) -> float:
    if base > 0.0:
        return math.pow(base, exponent)
    if base == 0.0:
        if exponent > 0.0:
            return 0.0
        if exponent == 0.0:
            return 1.0
        raise DomainError("zero raised to a negative power")
    # negative base: only integer exponents stay real
    if exponent != math.floor(exponent) or abs(exponent) > 1e15:
        raise DomainError(
            f"negative base {base!r} with non-integer exponent {exponent!r}"
        )
    return math.pow(base, exponent)


def evaluate(e: Expr, bindings: Mapping[str, float]) -> float:
    """Evaluate in IEEE double precision.

    Raises DomainError for log or sqrt of an out of range argument, division
    by zero, impossible powers, and overflow in exp; raises UnboundVariable
    for a free variable missing from bindings.
    """
    try:
        return _eval(e, bindings)
    except OverflowError as exc:
        raise DomainError(f"overflow during evaluation: {exc}") from exc


def _eval(e: Expr, b: Mapping[str, float]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return float(b[e.name])
        except KeyError:
            raise UnboundVariable(f"variable {e.name!r} has no bound value") from None
    if isinstance(e, Unary):
        v = _eval(e.child, b)
        op = e.op
        if op == "neg":
            return -v
        if op == "exp":
            return math.exp(v)
        if op == "ln":
            if v <= 0.0:
                raise DomainError(f"ln of non-positive value {v!r}")
            return math.log(v)
        if op == "sin":
            return math.sin(v)
        if op == "cos":
            return math.cos(v)
        if op == "tan":
            return math.tan(v)
        if op == "atan":
            return math.atan(v)
        if op == "sqrt":
            if v < 0.0:
                raise DomainError(f"sqrt of negative value {v!r}")
            return math.sqrt(v)
        if op == "abs":
            return abs(v)
        if op == "sign":
            return _sign(v)
        raise ValueError(f"bad unary op {op!r}")
    l = _eval(e.left, b)
    r = _eval(e.right, b)
    op = e.op
    if op == "+":
        return l + r
    if op == "-":
        return l - r
    if op == "*":
        return l * r
    if op == "/":
        if r == 0.0:
            raise DomainError("division by zero")
        return l / r
    if op == "^":
        return _pow_checked(l, r)
    raise ValueError(f"bad binary op {op!r}")


# ---------------------------------------------------------------------------
# structural helpers


def variables_of(e: Expr) -> frozenset[str]:
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Unary):
        return variables_of(e.child)
    return variables_of(e.left) | variables_of(e.right)


def is_constant(e: Expr) -> bool:
    return not variables_of(e)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Num):
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Unary):
        return Unary(e.op, substitute(e.child, mapping))
    return Binary(e.op, substitute(e.left, mapping), substitute(e.right, mapping))


# small constructors that fold the obvious identities; they keep derivative
# trees readable without amounting to a simplifier
_ZERO = Num(0.0)
_ONE = Num(1.0)


def _is_num(e: Expr, v: float) -> bool:
    return isinstance(e, Num) and e.value == v


def _add(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Binary("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is_num(a, 0.0):
        return _neg(b)
    return Binary("-", a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.child
    return Unary("neg", a)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return _ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Binary("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0) and not _is_num(b, 0.0):
        return _ZERO
    if _is_num(b, 1.0):
        return a
    return Binary("/", a, b)


def _pow(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 1.0):
        return a
    if _is_num(b, 0.0):
        return _ONE
    return Binary("^", a, b)


def differentiate(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative with respect to var.

    abs differentiates to sign times the inner derivative and sign
    differentiates to zero, so results are valid away from the kink.
    """
    if isinstance(e, Num):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if e.name == var else _ZERO
    if isinstance(e, Unary):
        u = e.child
        du = differentiate(u, var)
        op = e.op
        if op == "neg":
            return _neg(du)
        if op == "exp":
            return _mul(Unary("exp", u), du)
        if op == "ln":
            return _div(du, u)
        if op == "sin":
            return _mul(Unary("cos", u), du)
        if op == "cos":
            return _neg(_mul(Unary("sin", u), du))
        if op == "tan":
            return _div(du, _pow(Unary("cos", u), Num(2.0)))
        if op == "atan":
            return _div(du, _add(_ONE, _pow(u, Num(2.0))))
        if op == "sqrt":
            return _div(du, _mul(Num(2.0), Unary("sqrt", u)))
        if op == "abs":
            return _mul(Unary("sign", u), du)
        if op == "sign":
            return _ZERO
        raise ValueError(f"bad unary op {op!r}")
    l, r = e.left, e.right
    dl = differentiate(l, var)
    dr = differentiate(r, var)
    op = e.op
    if op == "+":
        return _add(dl, dr)
    if op == "-":
        return _sub(dl, dr)
    if op == "*":
        return _add(_mul(dl, r), _mul(l, dr))
    if op == "/":
        return _div(_sub(_mul(dl, r), _mul(l, dr)), _pow(r, Num(2.0)))
    if op == "^":
        if is_constant(r):
            # d(u^c) = c*u^(c-1)*u'
            return _mul(_mul(r, _pow(l, _sub(r, _ONE))), dl)
        # general case via u^v * (v' ln u + v u'/u)
        return _mul(
            Binary("^", l, r),
            _add(_mul(dr, Unary("ln", l)), _mul(r, _div(dl, l))),
        )
    raise ValueError(f"bad binary op {op!r}")


def fold(e: Expr) -> Expr:
    """Collapse constant subtrees and unit identities where safe.

    Subtrees whose evaluation raises are left untouched, so folding never
    changes where an expression is defined.
    """
    if isinstance(e, (Num, Var)):
        return e
    if isinstance(e, Unary):
        c = fold(e.child)
        out: Expr = Unary(e.op, c) if c is not e.child else e
        if isinstance(c, Num):
            try:
                return Num(evaluate(out, {}))
            except DomainError:
                return out
        return out
    l = fold(e.left)
    r = fold(e.right)
    table = {"+": _add, "-": _sub, "*": _mul, "/": _div, "^": _pow}
    candidate = table[e.op](l, r)
    if isinstance(candidate, Binary) and isinstance(candidate.left, Num) and isinstance(candidate.right, Num):
        try:
            return Num(evaluate(candidate, {}))
        except DomainError:
            return candidate
    return candidate


# ---------------------------------------------------------------------------
# serialization

# precedence used by the printer; neg sits between '*' and '^' because the
# grammar applies a leading minus to a whole power but not to a product
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 2.5, "^": 3}
_ATOM_PREC = 4.0


def _prec(e: Expr) -> float:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _PREC["neg"] if e.op == "neg" else _ATOM_PREC
    if isinstance(e, Num) and (e.value < 0.0 or math.copysign(1.0, e.value) < 0.0):
        return _PREC["neg"]
    return _ATOM_PREC


def _wrap(text: str, need: bool) -> str:
    return f"({text})" if need else text


def to_text(e: Expr) -> str:
    """Render with the minimal parentheses the printer reasons about.

    The output of parse-then-print is a fixed point of print, and reparsing
    it reproduces the tree.
    """
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + _wrap(to_text(e.child), _prec(e.child) < _PREC["^"])
        return f"{e.op}({to_text(e.child)})"
    op = e.op
    p = _PREC[op]
    lt, rt = to_text(e.left), to_text(e.right)
    if op == "^":
        # right associative: parenthesize an operand chain on the left
        return _wrap(lt, _prec(e.left) <= p) + op + _wrap(rt, _prec(e.right) < p)
    # left associative parse: a right operand of the same precedence level
    # must keep its parentheses for the reparse to rebuild the same tree
    need_left = _prec(e.left) < p
    need_right = _prec(e.right) <= p
    return _wrap(lt, need_left) + f" {op} " + _wrap(rt, need_right)
