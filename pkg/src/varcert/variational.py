"""Integrand and candidate-path abstractions for one-dimensional functionals.

Everything the certification pipeline needs from an integrand f(x, y, z),
with z standing for the slope y', is derived symbolically here: the
Euler-Lagrange residual, the pointwise coefficients p(x) = f_zz and
q(x) = f_yy - d/dx f_yz along a candidate path, a quadratic-in-slope
decomposition, and the change of variables that recenters a problem on an
arbitrary twice-differentiable path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .calculus import Grid
from .expr import (
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


class LegendreError(ValueError):
    """The leading slope-squared coefficient is not strictly positive where required."""


def sample_expr(e: Expr, env: Mapping[str, np.ndarray], like: np.ndarray) -> np.ndarray:
    """Evaluate over arrays and broadcast constants to the reference shape."""
    out = evaluate(e, env)
    if isinstance(out, np.ndarray) and out.shape == like.shape:
        return out
    return np.full_like(like, float(out))


@dataclass(frozen=True)
class Integrand:
    """Wraps f(x, y, z); every partial derivative is derived from f on demand."""

    f: Expr

    def __post_init__(self):
        if not isinstance(self.f, Expr):
            raise TypeError("integrand must wrap an Expr")

    @classmethod
    def from_text(cls, text: str) -> "Integrand":
        return cls(parse(text))

    @property
    def f_y(self) -> Expr:
        return diff(self.f, "y")

    @property
    def f_z(self) -> Expr:
        return diff(self.f, "z")

    @property
    def f_yy(self) -> Expr:
        return diff(self.f_y, "y")

    @property
    def f_yz(self) -> Expr:
        return diff(self.f_y, "z")

    @property
    def f_zz(self) -> Expr:
        return diff(self.f_z, "z")

    @property
    def f_xz(self) -> Expr:
        return diff(self.f_z, "x")

    @property
    def f_xyz(self) -> Expr:
        return diff(self.f_yz, "x")

    @property
    def f_yyz(self) -> Expr:
        return diff(self.f_yz, "y")

    @property
    def f_yzz(self) -> Expr:
        return diff(self.f_yz, "z")


@dataclass(frozen=True)
class Extremal:
    """Candidate path y0(x) on [a, b] with exact symbolic derivatives."""

    y0: Expr
    a: float
    b: float

    def __post_init__(self):
        if not isinstance(self.y0, Expr):
            raise TypeError("candidate path must be an Expr")
        if free_vars(self.y0) - {"x"}:
            raise ValueError("candidate path must be a function of x alone")
        a = float(self.a)
        b = float(self.b)
        if not a < b:
            raise ValueError("requires a < b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def zero(cls, a: float, b: float) -> "Extremal":
        return cls(ZERO, a, b)

    @classmethod
    def from_text(cls, text: str, a: float, b: float) -> "Extremal":
        return cls(parse(text), a, b)

    @property
    def y0p(self) -> Expr:
        return diff(self.y0, "x")

    @property
    def y0pp(self) -> Expr:
        return diff(self.y0p, "x")

    @property
    def boundary_values(self) -> tuple:
        return (
            float(evaluate(self.y0, {"x": self.a})),
            float(evaluate(self.y0, {"x": self.b})),
        )

    def sample(self, xs) -> tuple:
        """Values of (y0, y0', y0'') at the given abscissae."""
        xs = np.asarray(xs, dtype=float)
        env = {"x": xs}
        return (
            sample_expr(self.y0, env, xs),
            sample_expr(self.y0p, env, xs),
            sample_expr(self.y0pp, env, xs),
        )

    def grid(self, n: int = 512) -> Grid:
        return Grid(self.a, self.b, n)


def ensure_same_interval(y0: Extremal, grid: Grid) -> None:
    if grid.a != y0.a or grid.b != y0.b:
        raise ValueError("grid interval must match the candidate path interval")


@dataclass(frozen=True, eq=False)
class LegendreProfile:
    """Node samples of p(x) = f_zz and q(x) = f_yy - d/dx f_yz along a path."""

    grid: Grid
    p_of_x: np.ndarray
    q_of_x: np.ndarray
    p_min: float
    q_min: float


def coefficient_samples(f: Integrand, y0: Extremal, xs) -> tuple:
    """Sample p and q along the candidate path at arbitrary abscissae.

    The total derivative d/dx f_yz is expanded by the exact chain rule
    (f_xyz + f_yyz y0' + f_yzz y0''), never by numerical differentiation.
    """
    xs = np.asarray(xs, dtype=float)
    yv, ypv, yppv = y0.sample(xs)
    env = {"x": xs, "y": yv, "z": ypv}
    p = sample_expr(f.f_zz, env, xs)
    q = (
        sample_expr(f.f_yy, env, xs)
        - sample_expr(f.f_xyz, env, xs)
        - sample_expr(f.f_yyz, env, xs) * ypv
        - sample_expr(f.f_yzz, env, xs) * yppv
    )
    return p, q


def legendre_profile(f: Integrand, y0: Extremal, grid: Grid) -> LegendreProfile:
    """Profile with minima taken over the grid nodes."""
    ensure_same_interval(y0, grid)
    p, q = coefficient_samples(f, y0, grid.nodes)
    return LegendreProfile(grid, p, q, float(p.min()), float(q.min()))


def el_residual_at(f: Integrand, y0: Extremal, xs) -> np.ndarray:
    """Euler-Lagrange residual f_y - (f_xz + f_yz y0' + f_zz y0'') at abscissae."""
    xs = np.asarray(xs, dtype=float)
    yv, ypv, yppv = y0.sample(xs)
    env = {"x": xs, "y": yv, "z": ypv}
    return (
        sample_expr(f.f_y, env, xs)
        - sample_expr(f.f_xz, env, xs)
        - sample_expr(f.f_yz, env, xs) * ypv
        - sample_expr(f.f_zz, env, xs) * yppv
    )


def el_residual(f: Integrand, y0: Extremal, grid: Grid) -> np.ndarray:
    ensure_same_interval(y0, grid)
    return el_residual_at(f, y0, grid.nodes)


def el_residual_max(f: Integrand, y0: Extremal, grid: Grid) -> float:
    return float(np.max(np.abs(el_residual(f, y0, grid))))


def el_residual_fd(f: Integrand, y0: Extremal, grid: Grid) -> np.ndarray:
    """Residual with d/dx f_z taken by central differences; cross-check only."""
    ensure_same_interval(y0, grid)
    h = (y0.b - y0.a) * 1e-5

    def momentum(xs):
        yv, ypv, _ = y0.sample(xs)
        return sample_expr(f.f_z, {"x": xs, "y": yv, "z": ypv}, xs)

    xs = grid.nodes
    dfz = (momentum(xs + h) - momentum(xs - h)) / (2.0 * h)
    yv, ypv, _ = y0.sample(xs)
    return sample_expr(f.f_y, {"x": xs, "y": yv, "z": ypv}, xs) - dfz


@dataclass(frozen=True)
class QuadraticDecomposition:
    """f split as P(x,y) + Q(x,y) z + (1/2) R(x,y,z) z^2.

    ``R`` is the quotient expression 2 (f - P - Q z) / z^2, singular at z = 0;
    ``R_at_zero`` carries the limiting value f_zz(x, y, 0) for that point.
    """

    P: Expr
    Q: Expr
    R: Expr
    R_at_zero: Expr

    def r_value(self, x: float, y: float, z: float) -> float:
        branch = self.R_at_zero if z == 0.0 else self.R
        return float(evaluate(branch, {"x": x, "y": y, "z": z}))


def decompose(f: Integrand) -> QuadraticDecomposition:
    at_zero_slope = {"z": ZERO}
    P = simplify(substitute(f.f, at_zero_slope))
    Q = simplify(substitute(f.f_z, at_zero_slope))
    z = var("z")
    quotient = simplify(
        (const(2.0) * (f.f - P - Q * z)) / z ** 2
    )
    limit = simplify(substitute(f.f_zz, at_zero_slope))
    return QuadraticDecomposition(P, Q, quotient, limit)


def shift(f: Integrand, y0: Extremal) -> Integrand:
    """Recenter: returns g with g(x, y, z) = f(x, y + y0(x), z + y0'(x)).

    The zero path of g plays the role y0 played for f; residuals and
    coefficient profiles transported this way agree node-wise.
    """
    mapping = {
        "y": Expr("add", (var("y"), y0.y0)),
        "z": Expr("add", (var("z"), y0.y0p)),
    }
    return Integrand(simplify(substitute(f.f, mapping)))
