"""Shared fixtures and the independent RK4 oracle.

The oracle below deliberately re-derives the right-hand side from the raw
generator matrices instead of calling systems.vector_field_eval, so solver
tests compare two genuinely separate code paths.
"""

import numpy as np
import pytest

from lieaffine import catalog


def oracle_rhs(system, g, u):
    """dg/dt at g for constant u, straight from the defining matrices."""
    weights = np.concatenate(([1.0], np.atleast_1d(np.asarray(u, dtype=float))))
    pairs = [(system.drift_field, system.drift_invariant)] + list(system.controlled)
    out = np.zeros_like(np.asarray(g, dtype=float))
    for w, (field, y) in zip(weights, pairs):
        if field.group.kind == "rn":
            out = out + w * (field.generator @ g + y.reshape(-1))
        else:
            x = field.generator
            out = out + w * (x @ g - g @ x + y @ g)
    return out


def oracle_rk4(system, g0, u, t, dt=1e-4):
    """Classical fixed-step RK4, no projection, no package solver involved."""
    g = np.array(g0, dtype=float)
    steps = max(1, int(round(t / dt)))
    h = t / steps
    for _ in range(steps):
        k1 = oracle_rhs(system, g, u)
        k2 = oracle_rhs(system, g + 0.5 * h * k1, u)
        k3 = oracle_rhs(system, g + 0.5 * h * k2, u)
        k4 = oracle_rhs(system, g + h * k3, u)
        g = g + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return g


@pytest.fixture(scope="session")
def commuting_catalog():
    return catalog.commuting_inner_catalog()


@pytest.fixture(scope="session")
def whole_catalog():
    return catalog.full_catalog()
