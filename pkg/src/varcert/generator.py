"""Inverse-problem construction: integrands built to attain a minimum.

Given free ingredient functions, assembles an integrand of the form

    f = P(x,y) + (C + A(x) + [qfun(x,y) - qfun(x,0)]) z
        + (1/2) (pfun(x) + [rho(x,y,z) - rho(x,0,0)]) z^2

with A(x) the antiderivative of d/dy P(x, y) at y = 0 vanishing at a. By
construction the zero path satisfies the Euler-Lagrange equation exactly and
the leading slope-squared coefficient along it equals pfun. A nonzero
designated path is handled by substituting y -> y - y0(x), z -> z - y0'(x)
into the zero-path template. Doubles as the property-test corpus factory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.interpolate import CubicSpline

from .calculus import Grid, cumulative_integral
from .certify import MINIMUM_KINDS, VerdictKind, certify
from .expr import (
    ONE,
    X,
    Y,
    ZERO,
    Expr,
    const,
    diff,
    evaluate,
    free_vars,
    parse,
    simplify,
    substitute,
    var,
)
from .variational import Extremal, Integrand, LegendreError, sample_expr

_TABLE_N = 2048
_FIT_DEGREES = (4, 6, 8, 10, 12, 14, 16, 20, 24)
_FIT_TARGET = 1e-10
_FIT_ACCEPT = 1e-8
_MAX_POLY_TERMS = 64


class GeneratorError(RuntimeError):
    """Construction failed (typically: the antiderivative fit did not converge)."""


def _require_scope(e: Expr, allowed: frozenset, label: str) -> None:
    if not isinstance(e, Expr):
        raise TypeError(f"{label} must be an Expr")
    extra = free_vars(e) - allowed
    if extra:
        raise ValueError(f"{label} may only use {sorted(allowed)}; found {sorted(extra)}")


@dataclass(frozen=True)
class GeneratorSpec:
    """Ingredients for the minimum-by-construction integrand family.

    P: zeroth-order term, an expression in (x, y).
    qfun: shapes the linear-in-slope coefficient through its y-variation.
    pfun: strictly positive leading slope-squared coefficient, in x alone.
    rho: extra slope dependence beyond the leading quadratic term.
    C: constant added to the linear-in-slope coefficient; on fixed-boundary
       competitors its contribution integrates to a constant.
    y0: optional designated path; absent means the zero path.
    """

    P: Expr = ZERO
    qfun: Expr = ZERO
    pfun: Expr = ONE
    rho: Expr = ZERO
    C: float = 0.0
    a: float = 0.0
    b: float = 1.0
    y0: Optional[Extremal] = None

    def __post_init__(self):
        _require_scope(self.P, frozenset({"x", "y"}), "P")
        _require_scope(self.qfun, frozenset({"x", "y"}), "qfun")
        _require_scope(self.pfun, frozenset({"x"}), "pfun")
        _require_scope(self.rho, frozenset({"x", "y", "z"}), "rho")
        object.__setattr__(self, "C", float(self.C))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not self.a < self.b:
            raise ValueError("requires a < b")
        if self.y0 is not None:
            if not isinstance(self.y0, Extremal):
                raise TypeError("y0 must be an Extremal")
            if self.y0.a != self.a or self.y0.b != self.b:
                raise ValueError("designated path interval must match (a, b)")


@dataclass(frozen=True, eq=False)
class AntiderivativeTable:
    """Node samples of A(x), the cumulative integral of a rate function from a."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n + 1,):
            raise ValueError("table requires one value per node")
        if not np.all(np.isfinite(values)):
            raise ValueError("table values must be finite")
        if values[0] != 0.0:
            raise ValueError("antiderivative must vanish at the left endpoint")
        object.__setattr__(self, "values", values)

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.grid.nodes, self.values)

    def __call__(self, x):
        return self._spline(x)


def tabulate_antiderivative(rate: Callable[[np.ndarray], np.ndarray], a: float,
                            b: float, n: int = _TABLE_N) -> AntiderivativeTable:
    grid = Grid(a, b, n)
    return AntiderivativeTable(grid, cumulative_integral(rate, grid))


@dataclass(frozen=True)
class BuildInfo:
    """How the antiderivative A(x) was materialized."""

    a_path: str  # "symbolic" or "table"
    fit_degree: Optional[int] = None
    fit_error: Optional[float] = None
    table: Optional[AntiderivativeTable] = None


# ---------------------------------------------------------------------------
# closed-form antiderivatives (capability table)

_POLY_OPS = frozenset({"const", "var", "add", "sub", "mul", "neg", "pow"})


def _is_polynomial(e: Expr) -> bool:
    """Polynomial in x: only +, -, *, neg, nonnegative integer powers."""
    if free_vars(e) - {"x"}:
        return False

    def walk(node: Expr) -> bool:
        if node.op not in _POLY_OPS:
            return False
        if node.op == "pow" and node.value < 0:
            return False
        return all(walk(child) for child in node.args)

    return walk(e)


def _poly_coefficients(e: Expr) -> Optional[list]:
    """Power-basis coefficients via repeated exact differentiation at x = 0."""
    coefficients = []
    current = simplify(e)
    factorial = 1.0
    for k in range(_MAX_POLY_TERMS):
        if current == ZERO:
            return coefficients
        coefficients.append(float(evaluate(current, {"x": 0.0})) / factorial)
        current = diff(current, "x")
        factorial *= k + 1.0
    return None


def _horner(coefficients: list, variable: Expr) -> Expr:
    acc = const(float(coefficients[-1]))
    for c in reversed(coefficients[:-1]):
        acc = Expr("add", (const(float(c)), Expr("mul", (variable, acc))))
    return acc


def _affine_slope(e: Expr) -> Optional[float]:
    d = diff(e, "x")
    if d.op == "const":
        return d.value
    return None


def _oscillator_slope(e: Expr) -> Optional[float]:
    if e.op in ("sin", "cos", "exp"):
        slope = _affine_slope(e.args[0])
        if slope is not None and slope != 0.0:
            return slope
    return None


def antiderivative(e: Expr) -> Optional[Expr]:
    """A closed-form antiderivative in x, or None when outside the table.

    Covered: polynomials; sin, cos, exp of affine arguments; integer powers
    of affine arguments; products of a polynomial with one of the above
    oscillators (by repeated integration by parts); linear combinations and
    constant multiples of covered forms.
    """
    e = simplify(e)
    if free_vars(e) - {"x"}:
        return None
    return _anti(e)


def _anti(e: Expr) -> Optional[Expr]:
    if not free_vars(e):
        return simplify(Expr("mul", (e, X)))
    if _is_polynomial(e):
        coefficients = _poly_coefficients(e)
        if coefficients is not None:
            shifted = [c / (k + 1.0) for k, c in enumerate(coefficients)]
            return simplify(Expr("mul", (X, _horner(shifted, X))))
    op = e.op
    if op == "neg":
        inner = _anti(e.args[0])
        return None if inner is None else Expr("neg", (inner,))
    if op in ("add", "sub"):
        left = _anti(e.args[0])
        right = _anti(e.args[1])
        if left is None or right is None:
            return None
        return Expr(op, (left, right))
    if op == "mul":
        left, right = e.args
        if not free_vars(left):
            inner = _anti(right)
            return None if inner is None else Expr("mul", (left, inner))
        if not free_vars(right):
            inner = _anti(left)
            return None if inner is None else Expr("mul", (right, inner))
        if _is_polynomial(left) and _oscillator_slope(right) is not None:
            return _anti_product(left, right)
        if _is_polynomial(right) and _oscillator_slope(left) is not None:
            return _anti_product(right, left)
        return None
    if op in ("sin", "cos", "exp"):
        slope = _affine_slope(e.args[0])
        if slope is None or slope == 0.0:
            return None
        if op == "sin":
            return simplify(Expr("div", (Expr("neg", (Expr("cos", e.args),)), const(slope))))
        if op == "cos":
            return simplify(Expr("div", (Expr("sin", e.args), const(slope))))
        return simplify(Expr("div", (e, const(slope))))
    if op == "pow":
        base = e.args[0]
        n = e.value
        slope = _affine_slope(base)
        if slope is None or slope == 0.0 or n == -1:
            return None
        return simplify(Expr("div", (Expr("pow", (base,), n + 1), const(slope * (n + 1)))))
    if op == "div":
        num, den = e.args
        if not free_vars(den):
            inner = _anti(num)
            return None if inner is None else Expr("div", (inner, den))
        return None
    return None


def _anti_product(poly: Expr, oscillator: Expr) -> Optional[Expr]:
    # integral of p g = p G1 - p' G2 + p'' G3 - ... where G_{k+1} integrates G_k;
    # the chain stays inside the capability table, the polynomial dies off
    result = None
    current = simplify(poly)
    chain = oscillator
    positive = True
    for _ in range(_MAX_POLY_TERMS):
        chain = _anti(chain)
        if chain is None:
            return None
        term = Expr("mul", (current, chain))
        if result is None:
            result = term
        else:
            result = Expr("add" if positive else "sub", (result, term))
        current = diff(current, "x")
        if current == ZERO:
            return simplify(result)
        positive = not positive
    return None


# ---------------------------------------------------------------------------
# materialization


def _materialize(rate: Expr, a: float, b: float) -> tuple:
    closed = antiderivative(rate)
    if closed is not None:
        at_a = float(evaluate(closed, {"x": a}))
        return simplify(Expr("sub", (closed, const(at_a)))), BuildInfo("symbolic")
    return _fit_from_table(rate, a, b)


def _fit_from_table(rate: Expr, a: float, b: float) -> tuple:
    def rate_samples(xs):
        arr = np.asarray(xs, dtype=float)
        return sample_expr(rate, {"x": arr}, arr)

    table = tabulate_antiderivative(rate_samples, a, b, _TABLE_N)
    dense = np.linspace(a, b, 4097)
    rate_dense = rate_samples(dense)
    scale = 1.0 + float(np.max(np.abs(rate_dense)))
    best_expr = None
    best_resid = math.inf
    best_degree = None
    for degree in _FIT_DEGREES:
        candidate = _poly_antiderivative_expr(rate_samples, degree, a, b)
        resid_samples = sample_expr(diff(candidate, "x"), {"x": dense}, dense)
        resid = float(np.max(np.abs(resid_samples - rate_dense)))
        if resid < best_resid:
            best_expr = candidate
            best_resid = resid
            best_degree = degree
        if resid <= _FIT_TARGET * scale:
            break
    if best_resid > _FIT_ACCEPT * scale:
        raise GeneratorError(
            "no closed-form antiderivative and polynomial fitting stalled "
            f"(best derivative residual {best_resid:.3e})"
        )
    return best_expr, BuildInfo("table", fit_degree=best_degree,
                                fit_error=best_resid, table=table)


def _poly_antiderivative_expr(rate_samples, degree: int, a: float, b: float) -> Expr:
    """Exact antiderivative of a Chebyshev fit, expressed in the window variable."""
    series = npcheb.Chebyshev.interpolate(rate_samples, degree, domain=[a, b])
    power = npcheb.cheb2poly(series.coef)
    anti = [c / (k + 1.0) for k, c in enumerate(power)]
    u_expr = simplify(Expr("div", (
        Expr("sub", (Expr("mul", (const(2.0), X)), const(a + b))),
        const(b - a),
    )))
    poly_u = Expr("mul", (u_expr, _horner(anti, u_expr)))
    at_a = float(evaluate(poly_u, {"x": a}))
    return simplify(Expr("mul", (
        const(0.5 * (b - a)),
        Expr("sub", (poly_u, const(at_a))),
    )))


def _check_positive(pfun: Expr, a: float, b: float) -> None:
    grid = Grid(a, b, 512)
    xs = np.concatenate([grid.nodes, grid.midpoints])
    values = sample_expr(pfun, {"x": xs}, xs)
    if values.min() <= 0.0:
        raise LegendreError("pfun must be strictly positive on [a, b]")


# ---------------------------------------------------------------------------
# builders


def build_zero_with_info(spec: GeneratorSpec) -> tuple:
    """Integrand whose zero path is an exact extremal, plus build provenance."""
    if spec.y0 is not None:
        raise ValueError("build_zero requires the zero designated path")
    _check_positive(spec.pfun, spec.a, spec.b)
    rate = simplify(substitute(diff(spec.P, "y"), {"y": ZERO}))
    A, info = _materialize(rate, spec.a, spec.b)
    q_bracket = simplify(Expr("sub", (spec.qfun, substitute(spec.qfun, {"y": ZERO}))))
    rho_bracket = simplify(Expr("sub", (
        spec.rho,
        substitute(spec.rho, {"y": ZERO, "z": ZERO}),
    )))
    linear = simplify(Expr("add", (Expr("add", (const(spec.C), A)), q_bracket)))
    quadratic = simplify(Expr("add", (spec.pfun, rho_bracket)))
    z = var("z")
    f = simplify(Expr("add", (
        Expr("add", (spec.P, Expr("mul", (linear, z)))),
        Expr("mul", (
            Expr("mul", (const(0.5), quadratic)),
            Expr("pow", (z,), 2),
        )),
    )))
    return Integrand(f), info


def build_zero(spec: GeneratorSpec) -> Integrand:
    return build_zero_with_info(spec)[0]


def build_shifted_with_info(spec: GeneratorSpec) -> tuple:
    """Same template recentred on the designated path by substitution."""
    if spec.y0 is None:
        raise ValueError("build_shifted requires a designated path")
    base, info = build_zero_with_info(replace(spec, y0=None))
    mapping = {
        "y": Expr("sub", (Y, spec.y0.y0)),
        "z": Expr("sub", (var("z"), spec.y0.y0p)),
    }
    return Integrand(simplify(substitute(base.f, mapping))), info


def build_shifted(spec: GeneratorSpec) -> Integrand:
    return build_shifted_with_info(spec)[0]


def build(spec: GeneratorSpec) -> Integrand:
    """Dispatch on whether a designated path is present."""
    return build_zero(spec) if spec.y0 is None else build_shifted(spec)


def build_with_info(spec: GeneratorSpec) -> tuple:
    return build_zero_with_info(spec) if spec.y0 is None else build_shifted_with_info(spec)


# ---------------------------------------------------------------------------
# corpus

_MONOMIALS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3))
_QUADRATIC_COUNT = 6  # leading monomials of total degree <= 2
_QFUN_CHOICES = ("0", "x*y", "sin(x)*y")
_PFUN_CHOICES = ("1", "2+sin(x)", "1+x^2")
_RHO_CHOICES = ("0", "y*z", "0.1*sin(y)*z")
_C_CHOICES = (-1.0, 0.0, 1.0)

_SCREEN_N = 256
_MAX_ATTEMPTS = 64
# reject near-threshold instances so grid refinement cannot flip the verdict
_LENGTH_SAFETY = 1e-7


def _random_polynomial(rng: np.random.Generator, monomials: tuple) -> Expr:
    total = None
    for (i, j), c in zip(monomials, rng.uniform(-2.0, 2.0, len(monomials))):
        term = const(float(c))
        if i:
            term = Expr("mul", (term, X if i == 1 else Expr("pow", (X,), int(i))))
        if j:
            term = Expr("mul", (term, Y if j == 1 else Expr("pow", (Y,), int(j))))
        total = term if total is None else Expr("add", (total, term))
    return total


def _y0_choices(a: float, b: float) -> tuple:
    return (None, "sin(x)", f"x*({b!r}-x)")


def sample_corpus(seed: int, count: int, a: float, b: float) -> list:
    """Deterministic list of (spec, integrand, extremal) triples.

    Ingredients are drawn from documented finite families; candidates whose
    certificate is not a minimum on [a, b] (or sits too close to the length
    threshold) are rejected and redrawn, so every returned instance certifies.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    screen_grid = Grid(a, b, _SCREEN_N)
    out = []
    for index in range(count):
        rng = np.random.default_rng((seed, index))
        for _ in range(_MAX_ATTEMPTS):
            candidate = _draw(rng, a, b)
            integrand = build(candidate)
            extremal = candidate.y0 if candidate.y0 is not None else Extremal.zero(a, b)
            cert = certify(integrand, extremal, screen_grid)
            if cert.verdict.kind not in MINIMUM_KINDS:
                continue
            if cert.verdict.kind is VerdictKind.MINIMUM_UNDER_LENGTH:
                slack = cert.verdict.length_bound - screen_grid.length
                if slack <= _LENGTH_SAFETY * screen_grid.length:
                    continue
            out.append((candidate, integrand, extremal))
            break
        else:
            raise GeneratorError(f"no acceptable draw for corpus index {index}")
    return out


def _draw(rng: np.random.Generator, a: float, b: float) -> GeneratorSpec:
    # half the draws stay quadratic so the corpus exercises the regime where
    # the functional equals its second-order model exactly
    monomials = _MONOMIALS if rng.integers(0, 2) else _MONOMIALS[:_QUADRATIC_COUNT]
    P = _random_polynomial(rng, monomials)
    qfun = parse(_QFUN_CHOICES[rng.integers(0, len(_QFUN_CHOICES))])
    pfun = parse(_PFUN_CHOICES[rng.integers(0, len(_PFUN_CHOICES))])
    rho = parse(_RHO_CHOICES[rng.integers(0, len(_RHO_CHOICES))])
    C = _C_CHOICES[rng.integers(0, len(_C_CHOICES))]
    y0_text = _y0_choices(a, b)[rng.integers(0, 3)]
    y0 = None if y0_text is None else Extremal.from_text(y0_text, a, b)
    return GeneratorSpec(P=P, qfun=qfun, pfun=pfun, rho=rho, C=C, a=a, b=b, y0=y0)
