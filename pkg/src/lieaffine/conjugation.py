"""Conjugating systems along group homomorphisms.

A homomorphism F: G -> H carries a differential dF_e, stored as a matrix
in the two algebra bases. A system on G maps onto a system on H when the
linear-field flows conjugate through F and dF_e sends the right-invariant
parts onto each other; the checks below test both the structural
conditions and the trajectory-level identity F(phi_t(g, u)) =
psi_t(F(g), u) on sampled data.

The bundled determinant homomorphism lands in R (additive), i.e. it is
g |-> log det g, so GL(n)+ systems push forward to one-dimensional
abelian systems with slopes tr(Y_j).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, ValidationError
from .groups import (
    GroupSpec,
    abelian_field,
    abelian_rn,
    algebra_coords,
    algebra_from_coords,
    alg_exp,
    derivation_matrix,
    identity_element,
    linear_flow,
    mul,
    random_element,
    zero_field,
    LinearField,
    _as_element,
)
from .matcore import expm, frobenius_distance
from .solvers import SolveOptions, solve_piecewise
from .systems import AffineSystem, ControlSignal

__all__ = [
    "Homomorphism",
    "identity_hom",
    "determinant_hom",
    "user_hom",
    "HomReport",
    "validate_hom",
    "ConditionResult",
    "check_flow_conjugation",
    "check_derivation_intertwine",
    "ConjugationReport",
    "check_system_conjugation",
    "determinant_target_system",
]


@dataclass(frozen=True, eq=False)
class Homomorphism:
    """Group homomorphism with its differential at the identity.

    ``differential`` is the (target.dim, source.dim) matrix of dF_e in the
    two algebra bases.
    """

    source: GroupSpec
    target: GroupSpec
    map: Callable
    differential: np.ndarray
    name: str = "hom"

    def __post_init__(self):
        d = np.asarray(self.differential, dtype=float)
        if d.shape != (self.target.dim, self.source.dim):
            raise InputError(
                f"differential must be ({self.target.dim}, {self.source.dim}), got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise InputError("differential has non-finite entries")
        object.__setattr__(self, "differential", d)

    def __call__(self, g) -> np.ndarray:
        out = np.asarray(self.map(_as_element(self.source, g)), dtype=float)
        return _as_element(self.target, out, "homomorphism image")

    def push_algebra(self, z) -> np.ndarray:
        """dF_e applied to an algebra element of the source."""
        return algebra_from_coords(self.target, self.differential @ algebra_coords(self.source, z))


def identity_hom(spec: GroupSpec) -> Homomorphism:
    return Homomorphism(spec, spec, lambda g: np.asarray(g, dtype=float).copy(),
                        np.eye(spec.dim), name="identity")


def determinant_hom(source: GroupSpec, target: GroupSpec | None = None) -> Homomorphism:
    """g |-> [log det g] into additive R; differential row is tr(basis)."""
    if source.is_abelian:
        raise InputError("determinant homomorphism needs a matrix group source")
    if target is None:
        target = abelian_rn(1)
    if not (target.is_abelian and target.n == 1):
        raise InputError("determinant homomorphism targets R^1")
    def _map(g):
        det = float(np.linalg.det(g))
        if det <= 0:
            raise InputError("determinant homomorphism needs det(g) > 0")
        return np.array([np.log(det)])
    row = np.array([[float(np.trace(b)) for b in source.algebra_basis]])
    return Homomorphism(source, target, _map, row, name="det")


@dataclass(frozen=True)
class HomReport:
    ok: bool
    identity_error: float
    worst_product_error: float
    worst_differential_error: float


def validate_hom(hom: Homomorphism, n_pairs: int = 20, seed: int = 0,
                 tol: float = 1e-6) -> HomReport:
    """Spot-check F(e) = e, F(gh) = F(g)F(h), and dF_e against finite differences."""
    src, tgt = hom.source, hom.target
    id_err = frobenius_distance(hom(identity_element(src)), identity_element(tgt))
    rng = np.random.default_rng(seed)
    worst_prod = 0.0
    for _ in range(n_pairs):
        a = random_element(src, rng, 0.5)
        b = random_element(src, rng, 0.5)
        worst_prod = max(worst_prod, frobenius_distance(hom(mul(src, a, b)),
                                                        mul(tgt, hom(a), hom(b))))
    eps = 1e-5
    worst_diff = 0.0
    for i, basis_el in enumerate(src.algebra_basis):
        plus = hom(alg_exp(src, eps * basis_el))
        minus = hom(alg_exp(src, -eps * basis_el))
        fd = np.asarray(plus - minus, dtype=float) / (2.0 * eps)
        col = algebra_coords(tgt, fd)
        worst_diff = max(worst_diff, float(np.max(np.abs(col - hom.differential[:, i]))))
    ok = id_err <= tol and worst_prod <= tol and worst_diff <= tol
    return HomReport(ok, id_err, worst_prod, worst_diff)


def user_hom(source: GroupSpec, target: GroupSpec, map: Callable,
             differential=None, name: str = "user",
             tol: float = 1e-6, seed: int = 0) -> Homomorphism:
    """Wrap a callable as a homomorphism, validating it on random data.

    With differential omitted it is estimated by central finite differences
    on the algebra basis.
    """
    if differential is None:
        eps = 1e-5
        cols = []
        probe = Homomorphism(source, target, map, np.zeros((target.dim, source.dim)), name)
        for basis_el in source.algebra_basis:
            plus = probe(alg_exp(source, eps * basis_el))
            minus = probe(alg_exp(source, -eps * basis_el))
            cols.append(algebra_coords(target, (plus - minus) / (2.0 * eps)))
        differential = np.column_stack(cols)
    hom = Homomorphism(source, target, map, differential, name)
    rep = validate_hom(hom, seed=seed, tol=tol)
    if not rep.ok:
        raise ValidationError(
            f"map is not a homomorphism within {tol:g}: identity {rep.identity_error:.3g}, "
            f"products {rep.worst_product_error:.3g}, differential {rep.worst_differential_error:.3g}")
    return hom


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    worst_error: float
    witness: str | None = None


def _flow_conjugation_detail(hom: Homomorphism, field_src: LinearField,
                             field_tgt: LinearField,
                             ts: Sequence[float], samples: int, tol: float,
                             seed: int) -> ConditionResult:
    if field_src.group is not hom.source or field_tgt.group is not hom.target:
        raise InputError("fields do not match the homomorphism's groups")
    rng = np.random.default_rng(seed)
    points = [identity_element(hom.source)] + [random_element(hom.source, rng, 0.4)
                                               for _ in range(samples)]
    worst, witness = 0.0, None
    for k, g in enumerate(points):
        for t in ts:
            err = frobenius_distance(hom(linear_flow(field_src, t, g)),
                                     linear_flow(field_tgt, t, hom(g)))
            if err > worst:
                worst, witness = err, f"point {k}, t = {t:g}"
    return ConditionResult(worst <= tol, worst, None if worst <= tol else witness)


def check_flow_conjugation(hom: Homomorphism, field_src: LinearField,
                           field_tgt: LinearField,
                           ts: Sequence[float] = (0.25, 0.5, 1.0),
                           samples: int = 5, tol: float = 1e-6,
                           seed: int = 0) -> bool:
    """F(flow_src(t, g)) = flow_tgt(t, F(g)) on `samples` random points per t."""
    return _flow_conjugation_detail(hom, field_src, field_tgt, ts, samples, tol, seed).passed


def check_derivation_intertwine(hom: Homomorphism, d_src, d_tgt,
                                ts: Sequence[float] = (0.25, 0.5, 1.0),
                                tol: float = 1e-8) -> bool:
    """dF_e e^{t D_src} = e^{t D_tgt} dF_e at each listed t.

    D_src and D_tgt are derivation matrices in the source/target algebra
    bases (see derivation_matrix_in_basis).
    """
    a = np.asarray(d_src, dtype=float)
    b = np.asarray(d_tgt, dtype=float)
    if a.shape != (hom.source.dim, hom.source.dim):
        raise InputError(f"source derivation must be {hom.source.dim}x{hom.source.dim}")
    if b.shape != (hom.target.dim, hom.target.dim):
        raise InputError(f"target derivation must be {hom.target.dim}x{hom.target.dim}")
    for t in ts:
        lhs = hom.differential @ expm(float(t) * a)
        rhs = expm(float(t) * b) @ hom.differential
        if float(np.max(np.abs(lhs - rhs))) > tol:
            return False
    return True


def derivation_matrix_in_basis(field: LinearField) -> np.ndarray:
    """Derivation matrix in the group's algebra basis (abelian maps included)."""
    if field.group.is_abelian:
        # basis may be non-standard; conjugate the map into basis coordinates
        cols = [algebra_coords(field.group, field.generator @ b) for b in field.group.algebra_basis]
        return np.column_stack(cols)
    return derivation_matrix(field)


@dataclass(frozen=True)
class ConjugationReport:
    passed: bool
    anomaly: bool
    worst_error: float
    conditions: dict


def check_system_conjugation(hom: Homomorphism, sys_src: AffineSystem,
                             sys_tgt: AffineSystem,
                             signals: Sequence[ControlSignal],
                             points: int = 3, tol: float = 1e-6,
                             seed: int = 0,
                             options: SolveOptions | None = None) -> ConjugationReport:
    """Trajectory-level and structural conjugation checks in one report.

    Conditions: "trajectory" compares F(phi_t(g, u)) with the target
    solution from F(g) along each signal; "flow_conjugation" checks the
    m+1 linear-field flows channel by channel; "invariant_parts" checks
    dF_e Y_j = W_j. `anomaly` flags disagreement between the empirical
    and structural outcomes.
    """
    if sys_src.group is not hom.source or sys_tgt.group is not hom.target:
        raise InputError("systems do not match the homomorphism's groups")
    if sys_src.m != sys_tgt.m:
        raise InputError("systems have different control arity")
    if not signals:
        raise InputError("need at least one control signal")
    rng = np.random.default_rng(seed)
    starts = [identity_element(hom.source)] + [random_element(hom.source, rng, 0.4)
                                               for _ in range(points)]
    worst_traj, traj_witness = 0.0, None
    for si, signal in enumerate(signals):
        if signal.m != sys_src.m:
            raise InputError(f"signal {si} arity does not match the systems")
        for k, g in enumerate(starts):
            src_traj = solve_piecewise(sys_src, g, signal, options, samples_per_segment=3)
            tgt_traj = solve_piecewise(sys_tgt, hom(g), signal, options, samples_per_segment=3)
            for t, p, q in zip(src_traj.times, src_traj.points, tgt_traj.points):
                err = frobenius_distance(hom(p), q)
                if err > worst_traj:
                    worst_traj = err
                    traj_witness = f"signal {si}, point {k}, t = {t:g}"
    trajectory = ConditionResult(worst_traj <= tol, worst_traj,
                                 None if worst_traj <= tol else traj_witness)

    worst_flow, flow_witness = 0.0, None
    for j, (f_src, f_tgt) in enumerate(zip(sys_src.linear_fields, sys_tgt.linear_fields)):
        res = _flow_conjugation_detail(hom, f_src, f_tgt, (0.25, 0.5, 1.0),
                                       points, tol, seed + j)
        if res.worst_error > worst_flow:
            worst_flow = res.worst_error
            flow_witness = f"channel {j}" + (f" ({res.witness})" if res.witness else "")
    flows = ConditionResult(worst_flow <= tol, worst_flow,
                            None if worst_flow <= tol else flow_witness)

    worst_inv, inv_witness = 0.0, None
    for j, (y_src, y_tgt) in enumerate(zip(sys_src.invariant_parts, sys_tgt.invariant_parts)):
        err = frobenius_distance(hom.push_algebra(y_src), np.asarray(y_tgt, dtype=float))
        if err > worst_inv:
            worst_inv, inv_witness = err, f"channel {j}"
    invariants = ConditionResult(worst_inv <= tol, worst_inv,
                                 None if worst_inv <= tol else inv_witness)

    structural = flows.passed and invariants.passed
    return ConjugationReport(
        passed=trajectory.passed,
        anomaly=trajectory.passed != structural,
        worst_error=max(worst_traj, worst_flow, worst_inv),
        conditions={
            "trajectory": trajectory,
            "flow_conjugation": flows,
            "invariant_parts": invariants,
        },
    )


def determinant_target_system(sys_src: AffineSystem) -> AffineSystem:
    """Pushforward of a matrix-group system along g |-> log det g.

    Inner flows preserve the determinant, so only the right-invariant
    parts survive: the target on R is dx/dt = tr(Y_0) + sum u_j tr(Y_j).
    """
    if sys_src.group.is_abelian:
        raise InputError("determinant pushforward needs a matrix group source")
    target = abelian_rn(1)
    zero = zero_field(target)
    drift_inv = np.array([float(np.trace(sys_src.drift_invariant))])
    controlled = tuple((abelian_field(target, np.zeros((1, 1))),
                        np.array([float(np.trace(y))]))
                       for _, y in sys_src.controlled)
    return AffineSystem(target, zero, drift_inv, controlled, sys_src.control_bounds)
