"""Invariant-system reduction, LARC rank, and reachable-set probes.

When every linear field has an inner generator, trajectories of the affine
system are trajectories of a right-invariant system (generators X_j + Y_j)
multiplied on the right by exp(-t X_u). That reduction is what all the
checks here are built on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ValidationError
from .groups import (
    GroupSpec,
    alg_exp,
    algebra_from_coords,
    identity_element,
    in_algebra,
    inner_generator,
    mul,
    random_element,
    require_member,
    _as_element,
)
from .matcore import bracket, frobenius_distance, frobenius_norm, span_rank
from .solvers import SolveOptions, solve_from_point, solve_piecewise
from .systems import AffineSystem, ControlSignal, check_control, validate

__all__ = [
    "InvariantSystem",
    "associated_invariant_system",
    "invariant_endpoint",
    "verify_affine_invariant_relation",
    "larc_rank",
    "ReachSample",
    "sample_reachable",
    "HitReport",
    "check_exp_in_reachable",
    "CoverageReport",
    "check_identity_interior",
]


@dataclass(frozen=True, eq=False)
class InvariantSystem:
    """Right-invariant system dg/dt = Z_0 g + sum_j u_j Z_j g (algebra data only)."""

    group: GroupSpec
    drift: np.ndarray
    controlled: tuple = ()

    def __post_init__(self):
        drift = np.asarray(self.drift, dtype=float)
        ctrl = tuple(np.asarray(z, dtype=float) for z in self.controlled)
        want = (self.group.n,) if self.group.is_abelian else (self.group.n, self.group.n)
        for z in (drift,) + ctrl:
            if z.shape != want:
                raise InputError(f"algebra element has shape {z.shape}, expected {want}")
            if not np.all(np.isfinite(z)):
                raise InputError("algebra element has non-finite entries")
            if not in_algebra(self.group, z):
                raise InputError(f"generator is not in the algebra of {self.group.name}")
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "controlled", ctrl)

    @property
    def m(self) -> int:
        return len(self.controlled)

    @property
    def generators(self) -> tuple:
        return (self.drift,) + self.controlled


def associated_invariant_system(system: AffineSystem) -> InvariantSystem:
    """Invariant system with generators X_j + Y_j.

    Requires every linear field to have an inner generator; a nonzero
    abelian map on R^n has none and is rejected.
    """
    rep = validate(system)
    if not rep.inner:
        raise ValidationError(
            "system has no associated invariant system: "
            + ("; ".join(rep.messages) or "a linear field has no inner generator")
        )
    gens = [inner_generator(f) + y for f, y in zip(system.linear_fields, system.invariant_parts)]
    return InvariantSystem(system.group, gens[0], tuple(gens[1:]))


def invariant_endpoint(inv: InvariantSystem, u, t, g=None) -> np.ndarray:
    """exp(t (Z_0 + sum u_j Z_j)) g, the invariant solution from g."""
    t = float(t)
    if not np.isfinite(t):
        raise InputError("time must be finite")
    v = np.atleast_1d(np.asarray(u, dtype=float))
    if v.shape != (inv.m,):
        raise InputError(f"control has {v.shape[0]} components, system has m = {inv.m}")
    total = inv.drift + sum(c * z for c, z in zip(v, inv.controlled))
    spec = inv.group
    start = identity_element(spec) if g is None else _as_element(spec, g)
    return require_member(spec, mul(spec, alg_exp(spec, t * total), start),
                          factor=10.0, what="invariant endpoint")


def verify_affine_invariant_relation(system: AffineSystem, u, t,
                                     tol: float = 1e-8, seed: int = 0,
                                     points: int = 3,
                                     options: SolveOptions | None = None) -> bool:
    """Check phi_t(g, u) = (invariant solution from g) * exp(-t X_u).

    Tested at the identity plus `points` random group elements.
    """
    inv = associated_invariant_system(system)
    v = check_control(system, u)
    spec = system.group
    weights = np.concatenate(([1.0], v))
    x_u = sum(c * inner_generator(f) for c, f in zip(weights, system.linear_fields))
    tail = alg_exp(spec, -float(t) * x_u)
    rng = np.random.default_rng(seed)
    starts = [identity_element(spec)] + [random_element(spec, rng, 0.4) for _ in range(points)]
    for g in starts:
        lhs = solve_from_point(system, g, v, t, options)
        rhs = mul(spec, invariant_endpoint(inv, v, t, g), tail)
        if frobenius_distance(lhs, rhs) > tol:
            return False
    return True


def larc_rank(inv: InvariantSystem, tol: float = 1e-9) -> int:
    """Dimension of the Lie algebra generated by the system's generators.

    Iteratively brackets a spanning set against the generators until no
    new directions appear; directions whose residual against the running
    span falls below tol times the largest norm seen are discarded.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    gens = [np.asarray(z, dtype=float) for z in inv.generators]
    if inv.group.is_abelian:
        # abelian algebra: brackets vanish, the span of the generators is it
        return span_rank(gens, tol)
    scale = max([frobenius_norm(z) for z in gens] + [0.0])
    if scale == 0.0:
        return 0
    basis_flat: list = []
    reps: list = []

    def try_add(mat: np.ndarray) -> bool:
        nonlocal scale
        scale = max(scale, frobenius_norm(mat))
        v = mat.ravel().copy()
        for b in basis_flat:
            v -= (b @ v) * b
        r = float(np.linalg.norm(v))
        if r <= tol * scale:
            return False
        basis_flat.append(v / r)
        reps.append(mat)
        return True

    for z in gens:
        try_add(z)
    frontier = list(reps)
    while frontier:
        new = []
        for a in frontier:
            for z in gens:
                c = bracket(a, z)
                if try_add(c):
                    new.append(c)
        frontier = new
    return len(reps)


# ---------------------------------------------------------------------------
# reachable-set sampling


@dataclass(frozen=True, eq=False)
class ReachSample:
    """Monte Carlo cloud of endpoints reachable from `base` by time `horizon`."""

    system: AffineSystem
    base: np.ndarray
    horizon: float
    k_segments: int
    seed: int
    signals: tuple
    endpoints: tuple


def sample_reachable(system: AffineSystem, g, horizon: float, k_segments: int,
                     n_samples: int, seed: int,
                     options: SolveOptions | None = None) -> ReachSample:
    """Endpoints of n_samples random piecewise-constant controls.

    Each sample draws a k x m control matrix uniformly from the system's
    control box with its own generator seeded by (seed, index), so clouds
    are reproducible and extending n_samples keeps earlier draws.
    """
    if system.control_bounds is None:
        raise InputError("sampling needs bounded controls; the system has no control box")
    horizon = float(horizon)
    if not np.isfinite(horizon) or horizon <= 0:
        raise InputError("horizon must be positive")
    if k_segments < 1:
        raise InputError("k_segments must be >= 1")
    if n_samples < 0:
        raise InputError("n_samples must be >= 0")
    if seed < 0:
        raise InputError("seed must be >= 0")
    spec = system.group
    base = require_member(spec, _as_element(spec, g, "base point"), what="base point")
    lo, hi = system.control_bounds
    dur = horizon / k_segments
    signals = []
    endpoints = []
    for idx in range(n_samples):
        rng = np.random.default_rng([seed, idx])
        mat = rng.uniform(lo, hi, size=(k_segments, system.m))
        signal = ControlSignal(tuple((dur, mat[k]) for k in range(k_segments)))
        traj = solve_piecewise(system, base, signal, options)
        signals.append(signal)
        endpoints.append(traj.endpoint)
    return ReachSample(system, base, horizon, k_segments, seed,
                       tuple(signals), tuple(endpoints))


@dataclass(frozen=True)
class HitReport:
    hit: bool
    distance: float
    index: int


def check_exp_in_reachable(system: AffineSystem, u, t, cloud: ReachSample,
                           eps: float) -> HitReport:
    """Distance from the cloud to exp(t X_u), X_u = X_0 + sum u_j X_j.

    `hit` means some cloud endpoint lies within eps of the target; a hit
    supports exp(t X_u) being reachable, a miss is inconclusive (the cloud
    is only a sample).
    """
    if eps <= 0:
        raise InputError("eps must be positive")
    if not cloud.endpoints:
        raise InputError("cloud is empty")
    v = check_control(system, u)
    spec = system.group
    weights = np.concatenate(([1.0], v))
    gens = [inner_generator(f) for f in system.linear_fields]
    if any(gen is None for gen in gens):
        raise ValidationError("a linear field has no inner generator")
    x_u = sum(c * z for c, z in zip(weights, gens))
    target = alg_exp(spec, float(t) * x_u)
    dists = [frobenius_distance(p, target) for p in cloud.endpoints]
    best = int(np.argmin(dists))
    return HitReport(dists[best] <= eps, float(dists[best]), best)


@dataclass(frozen=True)
class CoverageReport:
    covered_fraction: float
    radius: float
    eps: float
    n_directions: int


def check_identity_interior(cloud: ReachSample, radius: float, n_directions: int,
                            eps: float | None = None, seed: int = 0) -> CoverageReport:
    """Fraction of algebra directions d with exp(radius d) within eps of the cloud.

    A crude interiority probe around the identity: the cloud must be based
    there. eps defaults to radius / 4.
    """
    spec = cloud.system.group
    if frobenius_distance(cloud.base, identity_element(spec)) > spec.membership_tol:
        raise InputError("interiority probe requires a cloud based at the identity")
    radius = float(radius)
    if not np.isfinite(radius) or radius <= 0:
        raise InputError("radius must be positive")
    if n_directions < 1:
        raise InputError("n_directions must be >= 1")
    if eps is None:
        eps = radius / 4.0
    if eps <= 0:
        raise InputError("eps must be positive")
    if not cloud.endpoints:
        raise InputError("cloud is empty")
    rng = np.random.default_rng(seed)
    covered = 0
    for _ in range(n_directions):
        coords = rng.normal(size=spec.dim)
        norm = float(np.linalg.norm(coords))
        if norm == 0.0:
            continue
        d = algebra_from_coords(spec, coords / norm)
        target = alg_exp(spec, radius * d)
        if min(frobenius_distance(p, target) for p in cloud.endpoints) <= eps:
            covered += 1
    return CoverageReport(covered / n_directions, radius, float(eps), n_directions)
