"""Dense matrix primitives shared by every other module.

All arrays are float64. Group elements of the abelian backend are 1-d
vectors; the distance and rank helpers accept anything that flattens.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError

__all__ = [
    "as_matrix",
    "as_vector",
    "expm",
    "bracket",
    "frobenius_norm",
    "frobenius_distance",
    "span_rank",
]


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a square float64 array, rejecting non-finite entries."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"{name}: expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name}: non-finite entries")
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim != 1 or a.shape[0] < 1:
        raise InputError(f"{name}: expected a 1-d vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name}: non-finite entries")
    return a


def expm(m) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring with Pade approximants)."""
    a = as_matrix(m)
    with np.errstate(over="ignore", invalid="ignore"):
        out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise NumericalError("expm overflowed to non-finite entries")
    return out


def bracket(a, b) -> np.ndarray:
    """Commutator [a, b] = ab - ba of two same-size square matrices."""
    x = as_matrix(a, "bracket lhs")
    y = as_matrix(b, "bracket rhs")
    if x.shape != y.shape:
        raise InputError(f"bracket: shape mismatch {x.shape} vs {y.shape}")
    return x @ y - y @ x


def frobenius_norm(a) -> float:
    arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError("frobenius_norm: non-finite entries")
    return float(np.linalg.norm(arr.ravel()))


def frobenius_distance(a, b) -> float:
    """Frobenius distance between two arrays of identical shape."""
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise InputError(f"frobenius_distance: shape mismatch {x.shape} vs {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InputError("frobenius_distance: non-finite entries")
    return float(np.linalg.norm((x - y).ravel()))


def span_rank(mats: Iterable, tol: float = 1e-9) -> int:
    """Numerical rank of a family of arrays viewed as flat vectors.

    Rank-revealing column-pivoted QR; pivots below tol times the largest
    input norm are treated as zero. The empty family has rank 0.
    """
    if tol <= 0:
        raise InputError("span_rank: tol must be positive")
    vecs = []
    for m in mats:
        a = np.asarray(m, dtype=float).ravel()
        if not np.all(np.isfinite(a)):
            raise InputError("span_rank: non-finite entries")
        vecs.append(a)
    if not vecs:
        return 0
    length = vecs[0].shape[0]
    if any(v.shape[0] != length for v in vecs):
        raise InputError("span_rank: inputs have mixed sizes")
    scale = max(float(np.linalg.norm(v)) for v in vecs)
    if scale == 0.0:
        return 0
    r = scipy.linalg.qr(np.column_stack(vecs), mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    return int(np.count_nonzero(diag > tol * scale))
