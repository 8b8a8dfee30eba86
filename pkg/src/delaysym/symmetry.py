"""Lie point symmetries of delay systems.

A vector field xi(x) d_x + eta(x, y) d_y acts on both points of the delay
pair, so its prolongation carries companion coefficients at (xm, ym) plus
the usual first order slope coefficient:

    zeta = eta_x + eta_y ydot - ydot xi'(x).

Applied to the system written as F1 = ydot - M(x, y, xm, ym) = 0,
F2 = xm - g(x) = 0, the field is a symmetry when both applied values vanish
on the solution manifold.  M must keep xm symbolic: the partial derivatives
with respect to x and xm cancel pairwise in ways that are invisible after
substituting xm = g(x).
"""

from __future__ import annotations

import cmath
import enum
import functools
import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from . import expr as ex
from .dods import Dods, LinearRhs, homogenized, _window_for
from .errors import (DegenerateRoot, DivergenceWarning, DomainError,
                     MeshRangeError, NonConvergence, NotASolution, OutOfRange,
                     ParameterDomainError, UnsupportedFlow)
from .steps import PiecewiseSolution, Segment, residual_scan

__all__ = [
    "AffineEta",
    "VectorField",
    "Invariance",
    "prolong_apply",
    "check_invariance",
    "vertical_from_solution",
    "flow",
    "CharacteristicRoot",
    "char_roots",
    "exp_symmetry_fields",
    "bernoulli_gf",
]


@dataclass(frozen=True)
class AffineEta:
    """eta = p(x) y + r(x) with r given in closed form or as a computed
    piecewise solution."""

    p: ex.Expr
    r: Union[ex.Expr, PiecewiseSolution]

    def __post_init__(self) -> None:
        extra = ex.variables_of(self.p) - {"x"}
        if extra:
            raise ParameterDomainError(f"p may only depend on x, found {sorted(extra)}")
        if not isinstance(self.r, PiecewiseSolution):
            extra = ex.variables_of(ex.as_expr(self.r, ("x",))) - {"x"}
            if extra:
                raise ParameterDomainError(
                    f"r may only depend on x, found {sorted(extra)}")


@dataclass(frozen=True)
class VectorField:
    xi: ex.Expr
    eta: Union[ex.Expr, AffineEta]
    name: str = ""

    def __post_init__(self) -> None:
        extra = ex.variables_of(self.xi) - {"x"}
        if extra:
            raise ParameterDomainError(f"xi may only depend on x, found {sorted(extra)}")
        if not isinstance(self.eta, AffineEta):
            extra = ex.variables_of(self.eta) - {"x", "y"}
            if extra:
                raise ParameterDomainError(
                    f"eta may only depend on x and y, found {sorted(extra)}")

    # -- pointwise evaluation -------------------------------------------

    def xi_at(self, x: float) -> float:
        return ex.evaluate(self.xi, {"x": x})

    def xi_prime_at(self, x: float) -> float:
        return ex.evaluate(_deriv(self.xi, "x"), {"x": x})

    def eta_at(self, x: float, y: float) -> float:
        if isinstance(self.eta, AffineEta):
            return (ex.evaluate(self.eta.p, {"x": x}) * y
                    + _r_value(self.eta.r, x))
        return ex.evaluate(self.eta, {"x": x, "y": y})

    def eta_x_at(self, x: float, y: float) -> float:
        if isinstance(self.eta, AffineEta):
            return (ex.evaluate(_deriv(self.eta.p, "x"), {"x": x}) * y
                    + _r_slope(self.eta.r, x))
        return ex.evaluate(_deriv(self.eta, "x"), {"x": x, "y": y})

    def eta_y_at(self, x: float, y: float) -> float:
        if isinstance(self.eta, AffineEta):
            return ex.evaluate(self.eta.p, {"x": x})
        return ex.evaluate(_deriv(self.eta, "y"), {"x": x, "y": y})


@functools.lru_cache(maxsize=512)
def _deriv(e: ex.Expr, name: str) -> ex.Expr:
    return ex.fold(ex.differentiate(e, name))


def _r_value(r: Union[ex.Expr, PiecewiseSolution], x: float) -> float:
    if isinstance(r, PiecewiseSolution):
        return r.value(x)
    return ex.evaluate(r, {"x": x})


def _r_slope(r: Union[ex.Expr, PiecewiseSolution], x: float) -> float:
    if isinstance(r, PiecewiseSolution):
        return r.eval(x)[2]
    return ex.evaluate(_deriv(r, "x"), {"x": x})


class Invariance(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"
    NOT_INVARIANT = "not-invariant"


_MANIFOLD_VARS = ("x", "y", "xm", "ym")


@functools.lru_cache(maxsize=256)
def _manifold_partials(m: ex.Expr) -> tuple[ex.Expr, ex.Expr, ex.Expr, ex.Expr]:
    return tuple(_deriv(m, v) for v in _MANIFOLD_VARS)  # type: ignore[return-value]


def _manifold_of(d: Dods) -> ex.Expr:
    if d.rhs_manifold is not None:
        return d.rhs_manifold
    # fallback: substituted form, with no xm dependence left
    return d.rhs.as_expr()


def _prolong_terms(v: VectorField, d: Dods,
                   point: tuple[float, float, float, float, float]
                   ) -> tuple[float, float, float]:
    x, y, xm, ym, ydot = point
    env = {"x": x, "y": y, "xm": xm, "ym": ym}
    m = _manifold_of(d)
    m_x, m_y, m_xm, m_ym = (ex.evaluate(p, env) for p in _manifold_partials(m))

    xi = v.xi_at(x)
    xi_m = v.xi_at(xm)
    eta = v.eta_at(x, y)
    eta_m = v.eta_at(xm, ym)
    zeta = v.eta_x_at(x, y) + v.eta_y_at(x, y) * ydot - ydot * v.xi_prime_at(x)

    terms = (zeta, xi * m_x, eta * m_y, xi_m * m_xm, eta_m * m_ym)
    pr1 = terms[0] - (terms[1] + terms[2] + terms[3] + terms[4])
    pr2 = xi_m - xi * d.delay.derivative(x)
    scale = max(abs(t) for t in terms + (xi_m, xi * d.delay.derivative(x)))
    return pr1, pr2, scale


def prolong_apply(v: VectorField, d: Dods,
                  point: tuple[float, float, float, float, float]
                  ) -> tuple[float, float]:
    """Apply the prolonged field to (F1, F2) at (x, y, xm, ym, ydot)."""
    pr1, pr2, _ = _prolong_terms(v, d, point)
    return pr1, pr2


def _r_breakpoints(v: VectorField) -> tuple[float, ...]:
    if isinstance(v.eta, AffineEta) and isinstance(v.eta.r, PiecewiseSolution):
        return v.eta.r.mesh.points
    return ()


def check_invariance(v: VectorField, d: Dods, samples: int = 200,
                     window: Optional[tuple[float, float]] = None,
                     seed: int = 7) -> tuple[float, Invariance]:
    """Monte Carlo invariance test.

    Samples the solution manifold (xm = g(x), ydot = f) and reports the
    largest applied prolongation value there, then perturbs y, ym, ydot by
    one unit and xm by half a gap to separate identities that hold
    everywhere from those relying on the manifold equations.  Tolerances
    scale with the largest term entering each evaluation, so cancellation
    is measured relative to what was cancelled.
    """
    if samples < 1:
        raise ParameterDomainError("need at least one sample")
    lo, hi = window if window is not None else _window_for(d.domain)
    rng = random.Random(seed)
    breaks = _r_breakpoints(v)

    def fresh_point() -> Optional[tuple[float, float, float, float, float]]:
        x = rng.uniform(lo, hi)
        if any(abs(x - b) <= 1e-6 for b in breaks):
            return None
        y = rng.uniform(-2.0, 2.0)
        ym = rng.uniform(-2.0, 2.0)
        try:
            xm = d.delay.delayed_point(x)
            ydot = d.rhs_value(x, y, ym)
        except (DomainError, OutOfRange, MeshRangeError):
            return None
        return (x, y, xm, ym, ydot)

    max_on = 0.0
    on_ok = True
    collected = 0
    attempts = 0
    on_points = []
    while collected < samples and attempts < 80 * samples:
        attempts += 1
        pt = fresh_point()
        if pt is None:
            continue
        try:
            pr1, pr2, scale = _prolong_terms(v, d, pt)
        except (DomainError, OutOfRange, MeshRangeError):
            continue
        collected += 1
        on_points.append(pt)
        worst = max(abs(pr1), abs(pr2))
        max_on = max(max_on, worst)
        if worst > 1e-7 * (1.0 + scale):
            on_ok = False
    if collected == 0:
        raise DomainError("no valid sample points in the window")
    if not on_ok:
        return max_on, Invariance.NOT_INVARIANT

    strong = True
    for i, (x, y, xm, ym, ydot) in enumerate(on_points):
        gap = x - xm
        sign = 1.0 if i % 2 == 0 else -1.0
        probes = (
            (x, y + sign, xm, ym, ydot),
            (x, y, xm, ym + sign, ydot),
            (x, y, xm, ym, ydot + sign),
            (x, y, xm + sign * gap / 2.0, ym, ydot),
        )
        for pt in probes:
            try:
                pr1, pr2, scale = _prolong_terms(v, d, pt)
            except (DomainError, OutOfRange, MeshRangeError):
                continue
            if max(abs(pr1), abs(pr2)) > 1e-7 * (1.0 + scale):
                strong = False
                break
        if not strong:
            break
    return max_on, Invariance.STRONG if strong else Invariance.WEAK


def vertical_from_solution(s: PiecewiseSolution, d: Dods) -> VectorField:
    """chi(x) d_y built from a computed solution of the homogeneous part;
    adding epsilon * chi to any solution preserves the full system."""
    worst = residual_scan(s, homogenized(d))
    if worst > 1e-8:
        raise NotASolution(
            f"candidate leaves a homogeneous residual of {worst!r}, "
            "larger than 1e-08")
    return VectorField(ex.Num(0.0), AffineEta(ex.Num(0.0), s), name="chi d_y")


def _affine_parts(eta: Union[ex.Expr, AffineEta]
                  ) -> tuple[ex.Expr, Union[ex.Expr, PiecewiseSolution]]:
    if isinstance(eta, AffineEta):
        return eta.p, eta.r
    p = _deriv(eta, "y")
    if "y" in ex.variables_of(p):
        raise UnsupportedFlow("eta is not affine in y; no closed flow")
    r = ex.fold(ex.substitute(eta, {"y": ex.Num(0.0)}))
    return p, r


def flow(v: VectorField, eps: float, s: PiecewiseSolution, d: Dods
         ) -> PiecewiseSolution:
    """Transport a solution along the one parameter group of v.

    Supported: vertical fields affine in y with constant p, which act
    segment by segment, and constant x-translations of autonomous systems
    with a constant delay.  Anything else raises UnsupportedFlow.
    """
    if not ex.is_constant(v.xi):
        raise UnsupportedFlow("xi must be constant to move the mesh rigidly")
    xi0 = ex.evaluate(v.xi, {})

    if xi0 != 0.0:
        if not _is_zero(v.eta):
            raise UnsupportedFlow("mixed xi and eta flows are not available")
        from .delay import ConstantDelay
        if not isinstance(d.delay, ConstantDelay):
            raise UnsupportedFlow("x translation needs a constant delay")
        if not isinstance(d.rhs, LinearRhs):
            raise UnsupportedFlow("x translation needs a linear right hand side")
        for c in (d.rhs.alpha, d.rhs.beta, d.rhs.gamma):
            if not ex.is_constant(c):
                raise UnsupportedFlow(
                    "x translation needs x independent coefficients")
        return s.shifted(eps * xi0)

    p, r = _affine_parts(v.eta)
    if not ex.is_constant(p):
        raise UnsupportedFlow("the flow is closed form only for constant p")
    p0 = ex.evaluate(p, {})
    grow = math.exp(eps * p0)
    gain = eps if p0 == 0.0 else (grow - 1.0) / p0

    if not isinstance(r, PiecewiseSolution):
        offset = ex.fold(ex.Binary("*", ex.Num(gain), r))
        return s.mapped(grow, offset)

    segs = []
    for seg in s.segments:
        values = []
        derivs = []
        last = len(seg.nodes) - 1
        for j, (u, y, dyv) in enumerate(zip(seg.nodes, seg.values, seg.derivs)):
            rv, rdl, rdr = r.eval(u)
            rd = rdr if j == 0 else rdl if j == last else rdr
            values.append(grow * y + gain * rv)
            derivs.append(grow * dyv + gain * rd)
        segs.append(Segment(seg.nodes, tuple(values), tuple(derivs)))
    return PiecewiseSolution(s.mesh, tuple(segs))


def _is_zero(eta: Union[ex.Expr, AffineEta]) -> bool:
    if isinstance(eta, AffineEta):
        return (_is_zero(eta.p)
                and not isinstance(eta.r, PiecewiseSolution)
                and _is_zero(eta.r))
    folded = ex.fold(eta)
    return isinstance(folded, ex.Num) and folded.value == 0.0


# ---------------------------------------------------------------------------
# exponential solutions of y' = (y - y(x - C))/C


@dataclass(frozen=True)
class CharacteristicRoot:
    """Root of lambda = (1 - exp(-lambda C))/C, stored through
    z = -lambda C, which satisfies exp(z) = 1 + z."""

    C: float
    z: complex
    lam: complex
    k: int


def _char_residual(z: complex) -> complex:
    return cmath.exp(z) - 1.0 - z


def _newton_char(z: complex, low: float, high: float) -> Optional[complex]:
    for _ in range(100):
        f = _char_residual(z)
        if abs(f) <= 1e-14:
            return z
        df = cmath.exp(z) - 1.0
        if df == 0.0:
            return None
        step = f / df
        z = z - step
        if not low < z.imag < high:
            return None
        if abs(step) <= 1e-16 * (1.0 + abs(z)):
            break
    return z if abs(_char_residual(z)) <= 1e-12 else None


def _bisect_char(k: int) -> complex:
    # along x = ln(y/sin y) the imaginary part of the residual vanishes;
    # the real part changes sign across the branch
    def re_residual(y: float) -> float:
        x = math.log(y / math.sin(y - 2.0 * math.pi * k))
        return math.exp(x) * math.cos(y) - 1.0 - x

    lo = 2.0 * math.pi * k + 1e-9
    hi = 2.0 * math.pi * k + math.pi - 1e-9
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if re_residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    y = 0.5 * (lo + hi)
    return complex(math.log(y / math.sin(y - 2.0 * math.pi * k)), y)


def char_roots(C: float, kmax: int) -> tuple[CharacteristicRoot, ...]:
    """Branches k = 0..kmax of the characteristic equation, upper half
    plane; the k = 0 branch is the double root z = 0."""
    if not C > 0.0:
        raise ParameterDomainError(f"delay spacing must be positive, got {C!r}")
    if kmax < 0:
        raise ParameterDomainError(f"kmax must be >= 0, got {kmax!r}")
    roots = [CharacteristicRoot(C, 0j, 0j, 0)]
    for k in range(1, kmax + 1):
        low = 2.0 * math.pi * k - math.pi
        high = 2.0 * math.pi * k + math.pi
        seed = complex(math.log(2.0 * math.pi * k), 2.0 * math.pi * k)
        z = _newton_char(seed, low, high)
        if z is None:
            z = _newton_char(_bisect_char(k), low, high)
        if z is None:
            raise NonConvergence(
                f"characteristic root for branch k = {k} did not converge "
                "after 100 iterations")
        roots.append(CharacteristicRoot(C, z, -z / C, k))
    return tuple(roots)


def exp_symmetry_fields(root: CharacteristicRoot) -> tuple[VectorField, VectorField]:
    """exp(a x) cos(b x) d_y and exp(a x) sin(b x) d_y for lambda = a + i b."""
    a, b = root.lam.real, root.lam.imag
    if b == 0.0:
        raise DegenerateRoot(
            f"branch k = {root.k} has a real root; the pair of oscillatory "
            "fields degenerates")
    cos_field = _expr_pair("exp(a*x)*cos(b*x)", a, b)
    sin_field = _expr_pair("exp(a*x)*sin(b*x)", a, b)
    return (VectorField(ex.Num(0.0), cos_field, name="X5"),
            VectorField(ex.Num(0.0), sin_field, name="X6"))


def _expr_pair(text: str, a: float, b: float) -> ex.Expr:
    e = ex.parse(text, ("x", "a", "b"))
    return ex.fold(ex.substitute(e, {"a": ex.Num(a), "b": ex.Num(b)}))


# ---------------------------------------------------------------------------
# Bernoulli partial sums of z/(1 - exp(-z))


@functools.lru_cache(maxsize=1)
def _bernoulli_numbers(n: int = 40) -> tuple[Fraction, ...]:
    # recurrence sum_{j<=m} C(m+1, j) B_j = 0, exact in rationals
    out = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        for j in range(m):
            acc += Fraction(math.comb(m + 1, j)) * out[j]
        out.append(-acc / (m + 1))
    return tuple(out)


def bernoulli_gf(z: float, n: int) -> float:
    """Partial sum sum_{m=0}^{n} B_m (-z)^m / m!, converging to
    z/(1 - exp(-z)) for |z| < 2 pi."""
    if not 0 <= n <= 40:
        raise ParameterDomainError(f"truncation order must be in 0..40, got {n!r}")
    if abs(z) >= 2.0 * math.pi:
        warnings.warn(
            f"|z| = {abs(z)!r} is outside the radius of convergence 2*pi; "
            "the partial sum diverges", DivergenceWarning, stacklevel=2)
    numbers = _bernoulli_numbers()
    total = 0.0
    term = 1.0  # (-z)^m / m!
    for m in range(n + 1):
        if m > 0:
            term *= -z / m
        total += float(numbers[m]) * term
    return total
