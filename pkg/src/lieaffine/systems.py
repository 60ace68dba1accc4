"""Affine control systems and piecewise-constant control signals.

A system pairs a drift (linear field plus invariant algebra element) with
m controlled channels of the same shape:

    dg/dt = F_0(g) + Y_0 g + sum_j u_j (F_j(g) + Y_j g)

On R^n the invariant part is a translation vector and F_j(x) = A_j x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .groups import (
    GroupSpec,
    LinearField,
    check_commutation,
    in_algebra,
    inner_generator,
    _as_element,
)
from .matcore import as_matrix, as_vector

__all__ = [
    "AffineSystem",
    "ValidationReport",
    "validate",
    "vector_field_eval",
    "ControlSignal",
    "parse_signal",
    "format_signal",
    "check_control",
    "Trajectory",
    "systems_equal",
]


def _check_invariant(group: GroupSpec, y, name: str) -> np.ndarray:
    if group.is_abelian:
        v = as_vector(y, name)
        if v.shape != (group.n,):
            raise InputError(f"{name} has wrong size")
        return v
    m = as_matrix(y, name)
    if m.shape != (group.n, group.n):
        raise InputError(f"{name} has wrong size")
    if not in_algebra(group, m):
        raise InputError(f"{name} is not in the algebra of {group.name}")
    return m


@dataclass(frozen=True, eq=False)
class AffineSystem:
    """Drift plus m controlled channels, each a (linear field, invariant) pair."""

    group: GroupSpec
    drift_field: LinearField
    drift_invariant: np.ndarray
    controlled: tuple = ()
    control_bounds: tuple | None = None

    def __post_init__(self):
        if self.drift_field.group is not self.group:
            raise InputError("drift field lives on a different group")
        inv = _check_invariant(self.group, self.drift_invariant, "drift invariant")
        object.__setattr__(self, "drift_invariant", inv)
        checked = []
        for k, (f, y) in enumerate(self.controlled):
            if not isinstance(f, LinearField) or f.group is not self.group:
                raise InputError(f"controlled field {k + 1} lives on a different group")
            checked.append((f, _check_invariant(self.group, y, f"controlled invariant {k + 1}")))
        object.__setattr__(self, "controlled", tuple(checked))
        if self.control_bounds is not None:
            lo, hi = (float(b) for b in self.control_bounds)
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise InputError("control bounds must be finite with lo <= hi")
            object.__setattr__(self, "control_bounds", (lo, hi))

    @property
    def m(self) -> int:
        return len(self.controlled)

    @property
    def linear_fields(self) -> tuple:
        """Drift field first, then the m controlled fields."""
        return (self.drift_field,) + tuple(f for f, _ in self.controlled)

    @property
    def invariant_parts(self) -> tuple:
        return (self.drift_invariant,) + tuple(y for _, y in self.controlled)

    def __repr__(self):
        return f"AffineSystem({self.group.name}, m={self.m})"


@dataclass(frozen=True)
class ValidationReport:
    commuting: bool
    inner: bool
    messages: tuple
    offending: tuple


def validate(system: AffineSystem, tol: float = 1e-9) -> ValidationReport:
    """Check the hypotheses the explicit solvers rely on.

    ``commuting``: all m+1 linear fields pairwise commute.
    ``inner``: every linear field has an inner generator (field kind inner,
    or the zero map on R^n), so the closed-form route applies.
    """
    rep = check_commutation(system.linear_fields, tol)
    inner = all(inner_generator(f) is not None for f in system.linear_fields)
    messages = []
    if not rep.ok:
        pairs = ", ".join(f"({i}, {j})" for i, j in rep.offending)
        messages.append(f"linear fields do not commute: pairs {pairs} (worst {rep.worst:.3g})")
    if not inner:
        messages.append("some linear field has no inner generator (nonzero map on R^n)")
    return ValidationReport(rep.ok, inner, tuple(messages), rep.offending)


def check_control(system: AffineSystem, u) -> np.ndarray:
    """Validate a control value against the system's arity and bounds.

    Scalars are accepted for single-input systems.
    """
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if arr.ndim != 1:
        raise InputError(f"control must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("control has non-finite entries")
    v = arr
    if v.shape != (system.m,):
        raise InputError(f"control has {v.shape[0]} components, system has m = {system.m}")
    if system.control_bounds is not None:
        lo, hi = system.control_bounds
        if np.any(v < lo) or np.any(v > hi):
            raise InputError(f"control {v.tolist()} outside bounds [{lo}, {hi}]")
    return v


def vector_field_eval(system: AffineSystem, g, u) -> np.ndarray:
    """Right-hand side of the system at state g under control u."""
    v = check_control(system, u)
    x = _as_element(system.group, g, "state")
    fields = system.linear_fields
    invs = system.invariant_parts
    weights = np.concatenate(([1.0], v))
    if system.group.is_abelian:
        out = np.zeros(system.group.n)
        for w, f, y in zip(weights, fields, invs):
            out = out + w * (f.generator @ x + y)
        return out
    out = np.zeros((system.group.n, system.group.n))
    for w, f, y in zip(weights, fields, invs):
        gen = f.generator
        out = out + w * (gen @ x - x @ gen + y @ x)
    return out


# ---------------------------------------------------------------------------
# control signals


@dataclass(frozen=True, eq=False)
class ControlSignal:
    """Piecewise-constant control: a sequence of (duration, value) segments."""

    segments: tuple

    def __post_init__(self):
        if not self.segments:
            raise InputError("control signal needs at least one segment")
        checked = []
        m = None
        for dur, u in self.segments:
            d = float(dur)
            if not np.isfinite(d) or d <= 0:
                raise InputError(f"segment duration must be positive, got {dur}")
            v = np.atleast_1d(np.asarray(u, dtype=float))
            if v.ndim != 1 or not np.all(np.isfinite(v)):
                raise InputError("control value must be a finite vector")
            if m is None:
                m = v.shape[0]
            elif v.shape[0] != m:
                raise InputError("segments have inconsistent control arity")
            checked.append((d, v))
        object.__setattr__(self, "segments", tuple(checked))

    @property
    def m(self) -> int:
        return self.segments[0][1].shape[0]

    @property
    def total_duration(self) -> float:
        return float(sum(d for d, _ in self.segments))

    @staticmethod
    def constant(u, duration: float) -> "ControlSignal":
        return ControlSignal(((duration, np.atleast_1d(np.asarray(u, dtype=float))),))


def parse_signal(text: str, m: int | None = None) -> ControlSignal:
    """Parse "dur:u1,u2;dur:u1,u2" into a ControlSignal.

    Whitespace around tokens is ignored. With m given, every segment must
    carry exactly m components (m = 0 segments are written as "dur:").
    """
    if not isinstance(text, str) or not text.strip():
        raise InputError("empty control signal")
    segments = []
    for k, chunk in enumerate(text.strip().split(";")):
        chunk = chunk.strip()
        if not chunk:
            raise InputError(f"signal segment {k + 1} is empty")
        head, sep, tail = chunk.partition(":")
        if not sep:
            raise InputError(f"signal segment {k + 1}: expected 'duration:components'")
        try:
            dur = float(head.strip())
        except ValueError:
            raise InputError(f"signal segment {k + 1}: bad duration {head.strip()!r}") from None
        comps = []
        tail = tail.strip()
        if tail:
            for tok in tail.split(","):
                try:
                    comps.append(float(tok.strip()))
                except ValueError:
                    raise InputError(f"signal segment {k + 1}: bad component {tok.strip()!r}") from None
        if m is not None and len(comps) != m:
            raise InputError(f"signal segment {k + 1}: expected {m} components, got {len(comps)}")
        segments.append((dur, np.asarray(comps, dtype=float)))
    arities = {v.shape[0] for _, v in segments}
    if len(arities) > 1:
        raise InputError("signal segments have inconsistent arity")
    return ControlSignal(tuple(segments))


def format_signal(signal: ControlSignal) -> str:
    parts = []
    for dur, u in signal.segments:
        parts.append(f"{dur!r}:{','.join(repr(float(c)) for c in u)}")
    return ";".join(parts)


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution curve; points[k] is the state at times[k]."""

    times: np.ndarray
    points: tuple
    method: str
    signal: ControlSignal
    forced: bool = False

    def __post_init__(self):
        ts = as_vector(self.times, "times")
        if ts.shape[0] != len(self.points):
            raise InputError("times and points disagree in length")
        if ts.shape[0] < 1 or ts[0] != 0.0:
            raise InputError("trajectory must start at t = 0")
        if np.any(np.diff(ts) <= 0):
            raise InputError("times must be strictly increasing")
        object.__setattr__(self, "times", ts)
        object.__setattr__(self, "points", tuple(np.asarray(p, dtype=float) for p in self.points))

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]


def systems_equal(a: AffineSystem, b: AffineSystem, tol: float = 1e-12) -> bool:
    """Structural equality up to tol, used by the round-trip tests."""
    if a.group.kind != b.group.kind or a.group.n != b.group.n or a.m != b.m:
        return False
    if (a.control_bounds is None) != (b.control_bounds is None):
        return False
    if a.control_bounds is not None and not np.allclose(a.control_bounds, b.control_bounds, atol=tol):
        return False
    for fa, fb in zip(a.linear_fields, b.linear_fields):
        if fa.kind != fb.kind or not np.allclose(fa.generator, fb.generator, atol=tol):
            return False
    for ya, yb in zip(a.invariant_parts, b.invariant_parts):
        if not np.allclose(ya, yb, atol=tol):
            return False
    return True
