"""Built-in example systems used by the test suite and the samples/ files.

The commuting-inner set is the workhorse: four systems where both explicit
solution routes apply, spanning diagonal, block-diagonal, rotation-block
and pure-invariant structure. All generators are kept at norm about 1 so
the fixed-step oracle stays sharp.
"""

from __future__ import annotations

import numpy as np

from .groups import (
    abelian_field,
    abelian_rn,
    general_linear_plus,
    heisenberg3,
    inner_field,
    special_orthogonal,
    zero_field,
)
from .systems import AffineSystem

__all__ = [
    "gl2_linear",
    "gl2_diag_pair",
    "gl4_two_blocks",
    "gl6_rotation_blocks",
    "so3_invariant",
    "r2_bilinear",
    "heis3_invariant",
    "r1_translation",
    "commuting_inner_catalog",
    "full_catalog",
]


def _e(n, i, j, v=1.0):
    m = np.zeros((n, n))
    m[i, j] = v
    return m


def gl2_linear(traceful: bool = False) -> AffineSystem:
    """Linear system on GL(2)+: inner drift A, one right-invariant control B1.

    The default B1 is nilpotent (traceless); traceful=True switches to a
    control with trace 2, which makes determinant growth visible.
    """
    group = general_linear_plus(2)
    a = np.diag([1.0, -1.0])
    b1 = np.array([[1.0, 1.0], [0.0, 1.0]]) if traceful else np.array([[0.0, 1.0], [0.0, 0.0]])
    return AffineSystem(group, inner_field(group, a), np.zeros((2, 2)),
                        ((zero_field(group), b1),), (-1.0, 1.0))


def gl2_diag_pair() -> AffineSystem:
    """GL(2)+ with two commuting diagonal inner generators and full invariants."""
    group = general_linear_plus(2)
    x0 = np.diag([1.0, -1.0])
    x1 = np.diag([0.5, 1.0])
    y0 = np.array([[0.0, 0.5], [0.0, 0.0]])
    y1 = np.array([[0.0, 0.0], [0.5, 0.0]])
    return AffineSystem(group, inner_field(group, x0), y0,
                        ((inner_field(group, x1), y1),), (-1.0, 1.0))


def gl4_two_blocks() -> AffineSystem:
    """GL(4)+ block-diagonal: drift spins the first 2x2 block, control scales the second."""
    group = general_linear_plus(4)
    x0 = np.zeros((4, 4))
    x0[0, 1], x0[1, 0] = 1.0, -1.0
    x1 = np.zeros((4, 4))
    x1[2, 2], x1[3, 3] = 1.0, -1.0
    y0 = _e(4, 0, 2, 0.5) + _e(4, 1, 3, -0.25)
    y1 = _e(4, 2, 0, 0.25) + _e(4, 3, 1, 0.25)
    return AffineSystem(group, inner_field(group, x0), y0,
                        ((inner_field(group, x1), y1),), (-1.0, 1.0))


def gl6_rotation_blocks() -> AffineSystem:
    """GL(6)+ with two so(3)-style rotation generators in disjoint 3x3 blocks."""
    group = general_linear_plus(6)
    x0 = np.zeros((6, 6))
    x0[0, 1], x0[1, 0] = -0.5, 0.5  # z-rotation in the first block
    x1 = np.zeros((6, 6))
    x1[4, 5], x1[5, 4] = -0.5, 0.5  # x-style rotation in the second block
    y0 = _e(6, 0, 3, 0.25) + _e(6, 1, 4, 0.25) + _e(6, 2, 5, -0.25)
    y1 = _e(6, 3, 0, 0.25) + _e(6, 4, 1, -0.25) + _e(6, 5, 2, 0.25)
    return AffineSystem(group, inner_field(group, x0), y0,
                        ((inner_field(group, x1), y1),), (-1.0, 1.0))


def so3_invariant() -> AffineSystem:
    """Pure-invariant system on SO(3): no linear parts at all."""
    group = special_orthogonal(3)
    lx = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -0.5], [0.0, 0.5, 0.0]])
    ly = np.array([[0.0, 0.0, 0.5], [0.0, 0.0, 0.0], [-0.5, 0.0, 0.0]])
    return AffineSystem(group, zero_field(group), lx,
                        ((zero_field(group), ly),), (-1.0, 1.0))


def r2_bilinear() -> AffineSystem:
    """Classical bilinear system dx/dt = Ax + u Bx on R^2 with commuting diagonals."""
    group = abelian_rn(2)
    a = np.diag([1.0, 2.0])
    b1 = np.diag([3.0, -1.0])
    return AffineSystem(group, abelian_field(group, a), np.zeros(2),
                        ((abelian_field(group, b1), np.zeros(2)),), (-1.0, 1.0))


def heis3_invariant() -> AffineSystem:
    """Invariant system on the Heisenberg group with generators E12 and E23."""
    group = heisenberg3()
    return AffineSystem(group, zero_field(group), _e(3, 0, 1),
                        ((zero_field(group), _e(3, 1, 2)),), (-1.0, 1.0))


def r1_translation() -> AffineSystem:
    """Single constant translation on R: dx/dt = 1, no controls."""
    group = abelian_rn(1)
    return AffineSystem(group, zero_field(group), np.array([1.0]), (), (-1.0, 1.0))


def commuting_inner_catalog() -> dict:
    """The four systems on which both explicit solution routes apply."""
    return {
        "gl2_diag_pair": gl2_diag_pair(),
        "gl4_two_blocks": gl4_two_blocks(),
        "gl6_rotation_blocks": gl6_rotation_blocks(),
        "so3_invariant": so3_invariant(),
    }


def full_catalog() -> dict:
    cat = commuting_inner_catalog()
    cat["gl2_linear"] = gl2_linear()
    cat["gl2_linear_traceful"] = gl2_linear(traceful=True)
    cat["r2_bilinear"] = r2_bilinear()
    cat["heis3_invariant"] = heis3_invariant()
    cat["r1_translation"] = r1_translation()
    return cat
