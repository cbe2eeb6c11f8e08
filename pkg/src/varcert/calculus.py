"""Uniform grids, composite Simpson quadrature, and discrete Sobolev norms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [a, b] into an even number n of subintervals."""

    a: float
    b: float
    n: int = 512

    def __post_init__(self):
        a = float(self.a)
        b = float(self.b)
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ValueError("grid requires finite endpoints with a < b")
        if not isinstance(self.n, int) or self.n < 2 or self.n % 2 != 0:
            raise ValueError("grid size must be an even integer >= 2")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def length(self) -> float:
        return self.b - self.a

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n + 1)

    @cached_property
    def midpoints(self) -> np.ndarray:
        return self.nodes[:-1] + 0.5 * self.h


@dataclass(frozen=True, eq=False)
class SampledPath:
    """A path and its derivative sampled on the nodes of a grid.

    Derivative samples are supplied, not finite-differenced, so paths with
    symbolic derivatives contribute no differentiation noise to norms.
    """

    grid: Grid
    y: np.ndarray
    yp: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        yp = np.asarray(self.yp, dtype=float)
        expected = (self.grid.n + 1,)
        if y.shape != expected or yp.shape != expected:
            raise ValueError(f"path samples must have shape {expected}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(yp))):
            raise ValueError("path samples must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "yp", yp)


def _simpson_weights(n: int) -> np.ndarray:
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


def integrate(values, grid: Grid) -> float:
    """Composite Simpson estimate of the integral of node samples over [a, b]."""
    v = np.asarray(values, dtype=float)
    if v.shape != (grid.n + 1,):
        raise ValueError(f"expected {grid.n + 1} node values, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("node values must be finite")
    return float(grid.h / 3.0 * np.dot(_simpson_weights(grid.n), v))


def h1_norm_sq(path: SampledPath) -> float:
    """Squared Sobolev norm: the integral of y^2 + y'^2 over the path's grid."""
    return integrate(path.y * path.y + path.yp * path.yp, path.grid)


def friedrichs_coefficient(length: float) -> float:
    """The constant 16 L^2 / pi^2 relating the two halves of the Sobolev norm.

    Zero-boundary paths on an interval of the given length satisfy
    integral(y^2) <= friedrichs_coefficient(length) * integral(y'^2).
    """
    return 16.0 * length * length / (math.pi * math.pi)


def friedrichs_margin(path: SampledPath) -> float:
    """Slack of the inequality above for one concrete zero-boundary path."""
    if abs(path.y[0]) > _BOUNDARY_TOL or abs(path.y[-1]) > _BOUNDARY_TOL:
        raise ValueError("friedrichs_margin requires zero boundary values")
    coeff = friedrichs_coefficient(path.grid.length)
    return coeff * integrate(path.yp * path.yp, path.grid) - integrate(path.y * path.y, path.grid)


def cumulative_integral(rate: Callable[[np.ndarray], np.ndarray], grid: Grid) -> np.ndarray:
    """Antiderivative samples F(x_i) with F(a) = 0, one Simpson cell at a time.

    ``rate`` must accept an array of abscissae and return samples; midpoint
    values are used so each cell is a full Simpson panel.
    """
    at_nodes = np.asarray(rate(grid.nodes), dtype=float)
    at_mids = np.asarray(rate(grid.midpoints), dtype=float)
    if at_nodes.shape != (grid.n + 1,) or at_mids.shape != (grid.n,):
        raise ValueError("rate callable must be vectorized over abscissae")
    cells = grid.h / 6.0 * (at_nodes[:-1] + 4.0 * at_mids + at_nodes[1:])
    out = np.empty(grid.n + 1)
    out[0] = 0.0
    np.cumsum(cells, out=out[1:])
    if not np.all(np.isfinite(out)):
        raise ValueError("cumulative integral produced non-finite values")
    return out
