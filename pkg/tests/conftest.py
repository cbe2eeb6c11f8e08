"""Shared fixtures and random expression-tree machinery for the test suite."""

import numpy as np
import pytest

from varcert import Expr, const, var, sample_corpus

_VARIABLES = ("x", "y", "z")
_UNARY = ("sin", "cos", "exp", "ln", "sqrt", "tan", "sinh", "cosh")


def random_tree(rng: np.random.Generator, depth: int) -> Expr:
    """A random expression over x, y, z with bounded depth.

    Used by the derivative cross-check suite; domains are not constrained
    here, so callers must be prepared for evaluation-domain errors.
    """
    if depth == 0 or rng.random() < 0.28:
        if rng.random() < 0.45:
            return const(float(rng.uniform(-2.0, 2.0)))
        return var(_VARIABLES[rng.integers(0, 3)])
    roll = rng.random()
    if roll < 0.55:
        op = ("add", "sub", "mul", "div")[rng.integers(0, 4)]
        return Expr(op, (random_tree(rng, depth - 1), random_tree(rng, depth - 1)))
    if roll < 0.65:
        return Expr("pow", (random_tree(rng, depth - 1),), int(rng.integers(2, 4)))
    if roll < 0.72:
        return Expr("neg", (random_tree(rng, depth - 1),))
    return Expr(_UNARY[rng.integers(0, len(_UNARY))], (random_tree(rng, depth - 1),))


@pytest.fixture(scope="session")
def corpus100():
    """The deterministic hundred-instance corpus on [0, 0.6], seed 0."""
    return sample_corpus(0, 100, 0.0, 0.6)
