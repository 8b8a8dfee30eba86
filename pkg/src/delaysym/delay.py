"""Delay relations x- = g(x) and the meshes they generate.

A relation is valid at x when g(x) < x there.  Advancing inverts g: the
forward point of x is the unique x+ with g(x+) = x.  A mesh is the increasing
chain x_-1 < x_0 < ... < x_N with g(x_{n+1}) = x_n used by the method of
steps.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from . import expr as ex
from .errors import DomainError, NoForwardPoint, NotMonotone, ParameterDomainError

__all__ = [
    "DelayRelation",
    "ConstantDelay",
    "AffineDelay",
    "QScaleDelay",
    "MoebiusDelay",
    "GeneralDelay",
    "Mesh",
    "build_mesh",
    "closed_form_point",
    "parse_delay_spec",
    "scale_delay",
]

_X = ex.Var("x")
_GUARD = 1e-12


@dataclass(frozen=True)
class DelayRelation:
    def delayed_point(self, x: float) -> float:
        raise NotImplementedError

    def advance(self, x: float) -> float:
        raise NotImplementedError

    def as_expr(self) -> ex.Expr:
        """g as an expression in x."""
        raise NotImplementedError

    def derivative(self, x: float) -> float:
        """g'(x), used by prolongations."""
        raise NotImplementedError

    def gap_expr(self) -> ex.Expr:
        """x - g(x) as an expression in x."""
        return ex.fold(ex.Binary("-", _X, self.as_expr()))

    def spec_string(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantDelay(DelayRelation):
    tau: float

    def __post_init__(self) -> None:
        if not self.tau > 0.0:
            raise ParameterDomainError(f"constant delay needs tau > 0, got {self.tau!r}")

    def delayed_point(self, x: float) -> float:
        return x - self.tau

    def advance(self, x: float) -> float:
        return x + self.tau

    def as_expr(self) -> ex.Expr:
        return ex.Binary("-", _X, ex.Num(self.tau))

    def derivative(self, x: float) -> float:
        return 1.0

    def gap_expr(self) -> ex.Expr:
        return ex.Num(self.tau)

    def spec_string(self) -> str:
        return f"constant({self.tau!r})"


@dataclass(frozen=True)
class AffineDelay(DelayRelation):
    """x- = q*x - tau with q > 0.  Valid where (q - 1)*x < tau."""

    q: float
    tau: float

    def __post_init__(self) -> None:
        if not self.q > 0.0:
            raise ParameterDomainError(f"affine delay needs q > 0, got {self.q!r}")
        if self.tau == 0.0 and self.q == 1.0:
            raise ParameterDomainError("affine delay with q = 1 and tau = 0 is the identity")

    def delayed_point(self, x: float) -> float:
        xm = self.q * x - self.tau
        if not xm < x:
            raise DomainError(
                f"affine relation is not a delay at x = {x!r}: needs (q-1)*x < tau")
        return xm

    def advance(self, x: float) -> float:
        return (x + self.tau) / self.q

    def as_expr(self) -> ex.Expr:
        return ex.fold(ex.Binary("-", ex.Binary("*", ex.Num(self.q), _X), ex.Num(self.tau)))

    def derivative(self, x: float) -> float:
        return self.q

    def spec_string(self) -> str:
        return f"affine({self.q!r}, {self.tau!r})"


@dataclass(frozen=True)
class QScaleDelay(DelayRelation):
    """x- = q*x with 0 < q < 1, valid on x > 0."""

    q: float

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise ParameterDomainError(f"scale delay needs q in (0, 1), got {self.q!r}")

    def delayed_point(self, x: float) -> float:
        if not x > 0.0:
            raise DomainError(f"scale relation delays only on x > 0, got x = {x!r}")
        return self.q * x

    def advance(self, x: float) -> float:
        if not x > 0.0:
            raise DomainError(f"scale relation advances only on x > 0, got x = {x!r}")
        return x / self.q

    def as_expr(self) -> ex.Expr:
        return ex.Binary("*", ex.Num(self.q), _X)

    def derivative(self, x: float) -> float:
        return self.q

    def spec_string(self) -> str:
        return f"qscale({self.q!r})"


@dataclass(frozen=True)
class MoebiusDelay(DelayRelation):
    """x- = (x - C)/(1 + C*x), valid where C/(1 + C*x) > 0.

    On the angle variable theta = atan(x) this subtracts atan(C); advancing
    adds it back and fails at the pole 1 - C*x = 0, beyond which no real
    forward point exists.
    """

    c: float

    def __post_init__(self) -> None:
        if self.c == 0.0:
            raise ParameterDomainError("moebius delay needs C != 0")

    def delayed_point(self, x: float) -> float:
        den = 1.0 + self.c * x
        if abs(den) <= _GUARD * (1.0 + abs(self.c * x)):
            raise DomainError(f"moebius relation has a pole at x = {x!r}")
        if not self.c / den > 0.0:
            raise DomainError(
                f"moebius relation is not a delay at x = {x!r}: needs C/(1+Cx) > 0")
        return (x - self.c) / den

    def advance(self, x: float) -> float:
        den = 1.0 - self.c * x
        if den <= _GUARD * (1.0 + abs(self.c * x)):
            raise NoForwardPoint(
                f"moebius inversion leaves the line at x = {x!r} (1 - Cx = {den!r})")
        return (x + self.c) / den

    def as_expr(self) -> ex.Expr:
        c = ex.Num(self.c)
        return ex.Binary("/", ex.Binary("-", _X, c),
                         ex.Binary("+", ex.Num(1.0), ex.Binary("*", c, _X)))

    def derivative(self, x: float) -> float:
        den = 1.0 + self.c * x
        return (1.0 + self.c * self.c) / (den * den)

    def spec_string(self) -> str:
        return f"moebius({self.c!r})"


@dataclass(frozen=True)
class GeneralDelay(DelayRelation):
    """x- = g(x) for user supplied g, declared strictly increasing.

    delayed_point checks g(x) < x at every call.  advance solves g(x+) = x
    by doubling an initial bracket [x, x + 1] up to 60 times and bisecting;
    a non increasing sample sequence raises NotMonotone.
    """

    g: ex.Expr
    increasing: bool = True

    def __post_init__(self) -> None:
        extra = ex.variables_of(self.g) - {"x"}
        if extra:
            raise ParameterDomainError(f"delay function may only use x, found {sorted(extra)}")

    def delayed_point(self, x: float) -> float:
        xm = ex.evaluate(self.g, {"x": x})
        if not xm < x:
            raise DomainError(f"supplied relation is not a delay at x = {x!r}: g(x) = {xm!r}")
        return xm

    def advance(self, x: float) -> float:
        if not self.increasing:
            raise NotMonotone("cannot advance a relation not declared increasing")
        gval = lambda t: ex.evaluate(self.g, {"x": t})
        lo = x
        width = 1.0
        prev_g = gval(lo)
        hi = lo
        for _ in range(60):
            hi = x + width
            ghi = gval(hi)
            if ghi <= prev_g:
                raise NotMonotone(
                    f"delay function decreased between {lo!r} and {hi!r}")
            prev_g = ghi
            if ghi >= x:
                break
            lo = hi
            width *= 2.0
        else:
            raise NoForwardPoint(
                f"no forward point of {x!r} found below {hi!r}")
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid == a or mid == b:
                break
            if gval(mid) < x:
                a = mid
            else:
                b = mid
            if b - a <= 1e-16 * (1.0 + abs(a)):
                break
        root = 0.5 * (a + b)
        if abs(gval(root) - x) > 1e-13 * (1.0 + abs(x)):
            raise NoForwardPoint(
                f"forward point of {x!r} did not meet tolerance (got {root!r})")
        return root

    def as_expr(self) -> ex.Expr:
        return self.g

    def derivative(self, x: float) -> float:
        return ex.evaluate(ex.differentiate(self.g, "x"), {"x": x})

    def spec_string(self) -> str:
        return f'general("{ex.to_text(self.g)}")'


def scale_delay(c: float) -> DelayRelation:
    """Relation x- = c*x on x > 0 for c < 1, c != 0.

    0 < c < 1 gives the invertible scale relation; negative c still delays
    every positive x but is not increasing, so it is represented as a general
    relation that cannot be advanced or meshed.
    """
    if c == 0.0 or c >= 1.0:
        raise ParameterDomainError(f"scale ratio must satisfy c < 1, c != 0, got {c!r}")
    if c > 0.0:
        return QScaleDelay(c)
    return GeneralDelay(ex.Binary("*", ex.Num(c), _X), increasing=False)


def default_domain(relation: DelayRelation) -> tuple[float, float]:
    """Largest open interval on which the relation actually delays,
    i.e. where the gap x - g(x) stays positive."""
    if isinstance(relation, ConstantDelay):
        return (-math.inf, math.inf)
    if isinstance(relation, AffineDelay):
        q, tau = relation.q, relation.tau
        if q == 1.0:
            return (-math.inf, math.inf)
        if q < 1.0:
            return (-tau / (1.0 - q), math.inf)
        return (-math.inf, tau / (q - 1.0))
    if isinstance(relation, QScaleDelay):
        return (0.0, math.inf)
    if isinstance(relation, MoebiusDelay):
        return (-1.0 / relation.c, math.inf)
    return (-math.inf, math.inf)


# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True)
class Mesh:
    """Strictly increasing points x_-1, x_0, ..., x_N with g(x_{n+1}) = x_n."""

    points: tuple[float, ...]
    relation: DelayRelation

    def __post_init__(self) -> None:
        pts = self.points
        if len(pts) < 2:
            raise ParameterDomainError("a mesh needs at least two points")
        for a, b in zip(pts, pts[1:]):
            if not a < b:
                raise ParameterDomainError(f"mesh points must increase, got {a!r} then {b!r}")
            back = self.relation.delayed_point(b)
            if abs(back - a) > 1e-12 * (1.0 + abs(a)):
                raise ParameterDomainError(
                    f"mesh link broken: g({b!r}) = {back!r}, expected {a!r}")

    @property
    def intervals(self) -> int:
        return len(self.points) - 2


def build_mesh(relation: DelayRelation, x0: float, intervals: int) -> Mesh:
    """Mesh [g(x0), x0, advance(x0), ...] with the requested interval count.

    NoForwardPoint propagates when the chain cannot be continued, carrying
    how far it got; the mesh is never silently shortened.
    """
    if intervals < 1:
        raise ParameterDomainError(f"interval count must be >= 1, got {intervals!r}")
    points = [relation.delayed_point(x0), x0]
    x = x0
    for n in range(intervals):
        try:
            x = relation.advance(x)
        except NoForwardPoint as exc:
            raise NoForwardPoint(
                f"mesh truncated after {n} of {intervals} forward points: {exc}") from exc
        points.append(x)
    return Mesh(tuple(points), relation)


def _affine_parameters(relation: DelayRelation) -> Optional[tuple[float, float]]:
    if isinstance(relation, ConstantDelay):
        return 1.0, relation.tau
    if isinstance(relation, AffineDelay):
        return relation.q, relation.tau
    if isinstance(relation, QScaleDelay):
        return relation.q, 0.0
    return None


def closed_form_point(relation: DelayRelation, x0: float, x_minus1: float, n: int) -> float:
    """n-th mesh point of an affine family relation without iterating.

    For x- = q*x - tau the chain is x_n = x0/q**n + tau/(1-q)*(q**-n - 1)
    when q != 1 and x_n = x0 + n*tau when q = 1.  For q > 1 the points
    accumulate at tau/(q - 1).
    """
    qt = _affine_parameters(relation)
    if qt is None:
        raise ParameterDomainError(
            f"closed form mesh points exist only for affine family relations, "
            f"got {type(relation).__name__}")
    q, tau = qt
    expected = q * x0 - tau
    if abs(x_minus1 - expected) > 1e-9 * (1.0 + abs(expected)):
        raise ParameterDomainError(
            f"x_minus1 = {x_minus1!r} does not match the relation at x0 = {x0!r}")
    if q == 1.0:
        return x0 + n * tau
    return x0 * q ** (-n) + tau / (1.0 - q) * (q ** (-n) - 1.0)


# ---------------------------------------------------------------------------
# textual form used by the CLI and system files

_DELAY_RE = re.compile(r"^\s*([a-z]+)\s*\(\s*(.*?)\s*\)\s*$", re.S)


def parse_delay_spec(text: str) -> DelayRelation:
    """Parse 'constant(tau)', 'affine(q, tau)', 'qscale(q)', 'moebius(C)'
    or 'general("<expr in x>")'."""
    m = _DELAY_RE.match(text)
    if m is None:
        raise ParameterDomainError(f"cannot parse delay specification {text!r}")
    kind, body = m.group(1), m.group(2)
    if kind == "general":
        inner = body.strip()
        if len(inner) >= 2 and inner[0] in "\"'" and inner[-1] == inner[0]:
            inner = inner[1:-1]
        return GeneralDelay(ex.parse(inner, ("x",)))
    try:
        args = [float(p) for p in body.split(",")] if body else []
    except ValueError:
        raise ParameterDomainError(f"bad numeric arguments in delay spec {text!r}") from None
    if kind == "constant" and len(args) == 1:
        return ConstantDelay(args[0])
    if kind == "affine" and len(args) == 2:
        return AffineDelay(args[0], args[1])
    if kind == "qscale" and len(args) == 1:
        return QScaleDelay(args[0])
    if kind == "moebius" and len(args) == 1:
        return MoebiusDelay(args[0])
    raise ParameterDomainError(f"unknown delay specification {text!r}")
