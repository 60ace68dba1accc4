"""Matrix Lie groups, linear vector fields, and their flows.

Supported groups: GL(n)+ (positive determinant), SL(n), SO(n), the 3x3
Heisenberg group, and R^n as an additive group. Elements of the matrix
groups are (n, n) arrays; elements of R^n are (n,) vectors and the group
law is addition.

A linear vector field comes in exactly two representable flavours:

* ``inner``   -- generator X in the algebra, flow g |-> exp(tX) g exp(-tX),
                 induced algebra derivation ad(X). Matrix groups only.
* ``abelian`` -- an n x n map A on R^n, flow x |-> exp(tA) x. The flow is
                 linear, so it equals its own differential.

More general automorphism flows have no finite description here and are
rejected at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, NumericalError, ValidationError
from .matcore import as_matrix, as_vector, bracket, expm, frobenius_distance, frobenius_norm, span_rank

__all__ = [
    "GROUP_KINDS",
    "GroupSpec",
    "general_linear_plus",
    "special_linear",
    "special_orthogonal",
    "heisenberg3",
    "abelian_rn",
    "make_group",
    "identity_element",
    "mul",
    "inverse",
    "alg_exp",
    "group_membership",
    "require_member",
    "in_algebra",
    "algebra_coords",
    "algebra_from_coords",
    "random_algebra_element",
    "random_element",
    "LinearField",
    "inner_field",
    "abelian_field",
    "zero_field",
    "inner_generator",
    "linear_flow",
    "derivation_matrix",
    "CommutationReport",
    "check_commutation",
    "rho",
    "rho_compositional",
    "SemidirectElement",
    "semidirect_identity",
    "semidirect_mul",
    "semidirect_inverse",
    "semidirect_exp",
]

GROUP_KINDS = ("glplus", "sl", "so", "heis3", "rn")


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """A supported group together with a basis of its Lie algebra.

    The basis fixes coordinates for rank computations and derivation
    matrices. Factories below build the standard bases; custom bases are
    accepted as long as they are independent and bracket-closed.
    """

    name: str
    kind: str
    n: int
    algebra_basis: tuple = ()
    membership_tol: float = 1e-8

    def __post_init__(self):
        if self.kind not in GROUP_KINDS:
            raise InputError(f"unknown group kind {self.kind!r}")
        if self.n < 1:
            raise InputError("group dimension n must be >= 1")
        if self.kind == "heis3" and self.n != 3:
            raise InputError("heis3 requires n = 3")
        if self.kind in ("sl", "so") and self.n < 2:
            raise InputError(f"{self.kind} requires n >= 2")
        if self.membership_tol <= 0:
            raise InputError("membership_tol must be positive")
        if not self.algebra_basis:
            raise InputError("algebra_basis must be nonempty")
        checked = []
        for b in self.algebra_basis:
            if self.kind == "rn":
                checked.append(as_vector(b, "algebra basis"))
                if checked[-1].shape != (self.n,):
                    raise InputError("algebra basis entry has wrong size")
            else:
                checked.append(as_matrix(b, "algebra basis"))
                if checked[-1].shape != (self.n, self.n):
                    raise InputError("algebra basis entry has wrong size")
        object.__setattr__(self, "algebra_basis", tuple(checked))
        if span_rank(self.algebra_basis) != len(self.algebra_basis):
            raise InputError("algebra basis is linearly dependent")
        flat = np.column_stack([b.ravel() for b in self.algebra_basis])
        object.__setattr__(self, "_flat", flat)
        object.__setattr__(self, "_pinv", np.linalg.pinv(flat))
        if self.kind != "rn":
            for i, bi in enumerate(self.algebra_basis):
                for bj in self.algebra_basis[i + 1:]:
                    if not in_algebra(self, bracket(bi, bj)):
                        raise InputError("algebra basis is not closed under brackets")

    @property
    def dim(self) -> int:
        return len(self.algebra_basis)

    @property
    def is_abelian(self) -> bool:
        return self.kind == "rn"

    def __repr__(self):
        return f"GroupSpec({self.name!r}, kind={self.kind!r}, n={self.n})"


def _unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


def general_linear_plus(n: int, membership_tol: float = 1e-8) -> GroupSpec:
    basis = tuple(_unit(n, i, j) for i in range(n) for j in range(n))
    return GroupSpec(f"GL({n})+", "glplus", n, basis, membership_tol)


def special_linear(n: int, membership_tol: float = 1e-8) -> GroupSpec:
    basis = [_unit(n, i, j) for i in range(n) for j in range(n) if i != j]
    basis += [_unit(n, i, i) - _unit(n, i + 1, i + 1) for i in range(n - 1)]
    return GroupSpec(f"SL({n})", "sl", n, tuple(basis), membership_tol)


def special_orthogonal(n: int, membership_tol: float = 1e-8) -> GroupSpec:
    basis = tuple(_unit(n, i, j) - _unit(n, j, i) for i in range(n) for j in range(i + 1, n))
    return GroupSpec(f"SO({n})", "so", n, basis, membership_tol)


def heisenberg3(membership_tol: float = 1e-8) -> GroupSpec:
    basis = (_unit(3, 0, 1), _unit(3, 0, 2), _unit(3, 1, 2))
    return GroupSpec("Heis(3)", "heis3", 3, basis, membership_tol)


def abelian_rn(n: int, membership_tol: float = 1e-8) -> GroupSpec:
    basis = tuple(np.eye(n)[i] for i in range(n))
    return GroupSpec(f"R^{n}", "rn", n, basis, membership_tol)


_FACTORIES: dict[str, Callable] = {
    "glplus": general_linear_plus,
    "sl": special_linear,
    "so": special_orthogonal,
    "heis3": lambda n, tol=1e-8: heisenberg3(tol),
    "rn": abelian_rn,
}


def make_group(kind: str, n: int, membership_tol: float = 1e-8) -> GroupSpec:
    if kind not in _FACTORIES:
        raise InputError(f"unknown group kind {kind!r}")
    if kind == "heis3" and n != 3:
        raise InputError("heis3 requires n = 3")
    return _FACTORIES[kind](n, membership_tol)


# ---------------------------------------------------------------------------
# element operations


def identity_element(spec: GroupSpec) -> np.ndarray:
    if spec.is_abelian:
        return np.zeros(spec.n)
    return np.eye(spec.n)


def _as_element(spec: GroupSpec, g, name: str = "element") -> np.ndarray:
    if spec.is_abelian:
        v = as_vector(g, name)
        if v.shape != (spec.n,):
            raise InputError(f"{name}: expected shape ({spec.n},), got {v.shape}")
        return v
    m = as_matrix(g, name)
    if m.shape != (spec.n, spec.n):
        raise InputError(f"{name}: expected shape ({spec.n}, {spec.n}), got {m.shape}")
    return m


def mul(spec: GroupSpec, a, b) -> np.ndarray:
    x = _as_element(spec, a)
    y = _as_element(spec, b)
    return x + y if spec.is_abelian else x @ y


def inverse(spec: GroupSpec, a) -> np.ndarray:
    x = _as_element(spec, a)
    if spec.is_abelian:
        return -x
    out = np.linalg.inv(x)
    if not np.all(np.isfinite(out)):
        raise NumericalError("inverse produced non-finite entries")
    return out


def alg_exp(spec: GroupSpec, x) -> np.ndarray:
    """Exponential from the algebra into the group (identity map on R^n)."""
    if spec.is_abelian:
        return as_vector(x, "algebra element").copy()
    return expm(x)


def group_membership(spec: GroupSpec, g, factor: float = 1.0) -> bool:
    """True when g lies in the group within factor * membership_tol."""
    x = _as_element(spec, g)
    tol = factor * spec.membership_tol
    if spec.is_abelian:
        return True
    if spec.kind == "glplus":
        return float(np.linalg.det(x)) > 0.0
    if spec.kind == "sl":
        return abs(float(np.linalg.det(x)) - 1.0) <= tol
    if spec.kind == "so":
        ortho = frobenius_distance(x.T @ x, np.eye(spec.n))
        return ortho <= tol and float(np.linalg.det(x)) > 0.0
    # heis3: unit upper triangular
    dev = x - np.eye(3)
    dev[0, 1] = dev[0, 2] = dev[1, 2] = 0.0
    return frobenius_norm(dev) <= tol


def require_member(spec: GroupSpec, g, factor: float = 1.0, what: str = "element") -> np.ndarray:
    x = _as_element(spec, g, what)
    if not group_membership(spec, x, factor):
        raise NumericalError(f"{what} left the group {spec.name} (tol {factor * spec.membership_tol:g})")
    return x


def algebra_coords(spec: GroupSpec, x) -> np.ndarray:
    """Coordinates of x in the algebra basis (least squares, no residual check)."""
    v = np.asarray(x, dtype=float).ravel()
    if v.shape[0] != spec._flat.shape[0]:
        raise InputError("algebra element has wrong size")
    if not np.all(np.isfinite(v)):
        raise InputError("algebra element has non-finite entries")
    return spec._pinv @ v


def algebra_from_coords(spec: GroupSpec, coords) -> np.ndarray:
    c = as_vector(coords, "coords")
    if c.shape != (spec.dim,):
        raise InputError(f"expected {spec.dim} coordinates, got {c.shape[0]}")
    flat = spec._flat @ c
    return flat if spec.is_abelian else flat.reshape(spec.n, spec.n)


def in_algebra(spec: GroupSpec, x, tol: float | None = None) -> bool:
    """True when x lies in the span of the algebra basis within tol."""
    if tol is None:
        tol = spec.membership_tol
    v = np.asarray(x, dtype=float)
    want = (spec.n,) if spec.is_abelian else (spec.n, spec.n)
    if v.shape != want:
        return False
    if not np.all(np.isfinite(v)):
        raise InputError("algebra element has non-finite entries")
    coords = algebra_coords(spec, v)
    residual = spec._flat @ coords - v.ravel()
    scale = max(1.0, frobenius_norm(v))
    return float(np.linalg.norm(residual)) <= tol * scale


def random_algebra_element(spec: GroupSpec, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    coords = rng.normal(size=spec.dim) * scale
    return algebra_from_coords(spec, coords)


def random_element(spec: GroupSpec, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return alg_exp(spec, random_algebra_element(spec, rng, scale))


# ---------------------------------------------------------------------------
# linear vector fields


@dataclass(frozen=True, eq=False)
class LinearField:
    """A linear vector field on the group, one of the two backends above."""

    group: GroupSpec
    kind: str  # "inner" | "abelian"
    generator: np.ndarray

    def __post_init__(self):
        if self.kind == "inner":
            if self.group.is_abelian:
                raise InputError("inner fields require a matrix group; use an abelian map on R^n")
            gen = as_matrix(self.generator, "inner generator")
            if gen.shape != (self.group.n, self.group.n):
                raise InputError("inner generator has wrong size")
            if not in_algebra(self.group, gen):
                raise InputError(f"inner generator is not in the algebra of {self.group.name}")
        elif self.kind == "abelian":
            if not self.group.is_abelian:
                raise InputError("abelian linear maps only act on R^n")
            gen = as_matrix(self.generator, "abelian map")
            if gen.shape != (self.group.n, self.group.n):
                raise InputError("abelian map has wrong size")
        else:
            raise InputError(f"unknown linear field kind {self.kind!r}")
        gen = gen.copy()
        gen.setflags(write=False)
        object.__setattr__(self, "generator", gen)

    def __repr__(self):
        return f"LinearField({self.group.name}, {self.kind})"


def inner_field(group: GroupSpec, x) -> LinearField:
    return LinearField(group, "inner", np.asarray(x, dtype=float))


def abelian_field(group: GroupSpec, a) -> LinearField:
    return LinearField(group, "abelian", np.asarray(a, dtype=float))


def zero_field(group: GroupSpec) -> LinearField:
    z = np.zeros((group.n, group.n))
    return abelian_field(group, z) if group.is_abelian else inner_field(group, z)


def inner_generator(field: LinearField) -> np.ndarray | None:
    """Algebra element generating the field's flow by conjugation.

    Inner fields return their generator; the zero abelian map returns the
    zero vector (trivial flow); a nonzero abelian map has none.
    """
    if field.kind == "inner":
        return field.generator
    if not np.any(field.generator):
        return np.zeros(field.group.n)
    return None


def linear_flow(field: LinearField, t: float, g) -> np.ndarray:
    """Time-t flow of the field applied to g."""
    t = float(t)
    if not np.isfinite(t):
        raise InputError("flow time must be finite")
    spec = field.group
    x = _as_element(spec, g)
    if field.kind == "abelian":
        out = expm(t * field.generator) @ x
    else:
        e = expm(t * field.generator)
        out = e @ x @ expm(-t * field.generator)
    return require_member(spec, out, factor=10.0, what="flow image")


def derivation_matrix(field: LinearField) -> np.ndarray:
    """Matrix of the induced algebra derivation in the group's basis.

    ad(X) for inner fields, the map A itself for abelian ones.
    """
    if field.kind == "abelian":
        return field.generator.copy()
    spec = field.group
    cols = [algebra_coords(spec, bracket(field.generator, b)) for b in spec.algebra_basis]
    return np.column_stack(cols)


@dataclass(frozen=True)
class CommutationReport:
    ok: bool
    offending: tuple
    worst: float


def check_commutation(fields: Sequence[LinearField], tol: float = 1e-9) -> CommutationReport:
    """Pairwise commutation of the fields' flows.

    Checks brackets of derivation matrices and, for inner fields, of the
    generators themselves. Returns the offending index pairs.
    """
    fields = list(fields)
    if not fields:
        return CommutationReport(True, (), 0.0)
    spec = fields[0].group
    if any(f.group is not spec for f in fields[1:]):
        raise InputError("fields live on different groups")
    ders = [derivation_matrix(f) for f in fields]
    offending = []
    worst = 0.0
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            err = frobenius_norm(bracket(ders[i], ders[j]))
            if fields[i].kind == "inner" and fields[j].kind == "inner":
                err = max(err, frobenius_norm(bracket(fields[i].generator, fields[j].generator)))
            worst = max(worst, err)
            if err > tol:
                offending.append((i, j))
    return CommutationReport(not offending, tuple(offending), worst)


def rho(fields: Sequence[LinearField], tvec, g) -> np.ndarray:
    """Composite automorphism rho(t_0, ..., t_m) applied to g.

    For commuting flows this is the product of the individual flows; it is
    realized as one conjugation by exp(sum t_i X_i) (one linear map
    exp(sum t_i A_i) on R^n), which is exact in the commuting case the
    solvers rely on.
    """
    fields = list(fields)
    tvec = as_vector(tvec, "tvec") if len(fields) else np.zeros(0)
    if len(tvec) != len(fields):
        raise InputError(f"rho: {len(fields)} fields but {len(tvec)} times")
    if not fields:
        return np.asarray(g, dtype=float).copy()
    spec = fields[0].group
    if any(f.group is not spec for f in fields[1:]):
        raise InputError("fields live on different groups")
    x = _as_element(spec, g)
    if spec.is_abelian:
        total = sum(t * f.generator for t, f in zip(tvec, fields))
        out = expm(total) @ x
    else:
        total = sum(t * f.generator for t, f in zip(tvec, fields))
        out = expm(total) @ x @ expm(-total)
    return require_member(spec, out, factor=10.0, what="rho image")


def rho_compositional(fields: Sequence[LinearField], tvec, g) -> np.ndarray:
    """Literal composition of the individual flows, first field outermost.

    Agrees with rho when the fields commute; kept as an independent route
    for tests.
    """
    fields = list(fields)
    tvec = np.asarray(tvec, dtype=float)
    if len(tvec) != len(fields):
        raise InputError(f"rho_compositional: {len(fields)} fields but {len(tvec)} times")
    out = np.asarray(g, dtype=float).copy()
    for f, t in zip(reversed(fields), reversed(tvec)):
        out = linear_flow(f, t, out)
    return out


# ---------------------------------------------------------------------------
# semidirect product G x R^{m+1} induced by a family of fields


@dataclass(frozen=True, eq=False)
class SemidirectElement:
    """Pair (g, r) in the semidirect product of the group with R^{m+1}."""

    g: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))
        object.__setattr__(self, "r", as_vector(self.r, "translation part"))


def _semidirect_spec(fields: Sequence[LinearField]) -> GroupSpec:
    if not fields:
        raise InputError("semidirect product needs at least one field")
    spec = fields[0].group
    if any(f.group is not spec for f in fields[1:]):
        raise InputError("fields live on different groups")
    return spec


def semidirect_identity(fields: Sequence[LinearField]) -> SemidirectElement:
    spec = _semidirect_spec(fields)
    return SemidirectElement(identity_element(spec), np.zeros(len(fields)))


def semidirect_mul(fields: Sequence[LinearField], a: SemidirectElement, b: SemidirectElement) -> SemidirectElement:
    spec = _semidirect_spec(fields)
    if a.r.shape != (len(fields),) or b.r.shape != (len(fields),):
        raise InputError("translation parts do not match the field count")
    return SemidirectElement(mul(spec, a.g, rho(fields, a.r, b.g)), a.r + b.r)


def semidirect_inverse(fields: Sequence[LinearField], a: SemidirectElement) -> SemidirectElement:
    spec = _semidirect_spec(fields)
    return SemidirectElement(rho(fields, -a.r, inverse(spec, a.g)), -a.r)


def semidirect_exp(fields: Sequence[LinearField], w, s, t: float, n: int) -> SemidirectElement:
    """n-term product approximating the time-t one-parameter subgroup.

    With step tau = t/n this is the ordered product (i = 0 leftmost)

        prod_i rho(i tau s)(exp(tau w))  paired with translation t s.

    Literal O(n) loop; the solver module has the fast equivalent.
    """
    spec = _semidirect_spec(fields)
    if n < 1:
        raise InputError("semidirect_exp: n must be >= 1")
    t = float(t)
    s = as_vector(s, "s")
    if s.shape != (len(fields),):
        raise InputError("semidirect_exp: s does not match the field count")
    tau = t / n
    e = alg_exp(spec, tau * (as_vector(w, "w") if spec.is_abelian else as_matrix(w, "w")))
    if spec.is_abelian:
        d_inc = expm(tau * sum(si * f.generator for si, f in zip(s, fields)))
        total = np.zeros(spec.n)
        cur = e
        for _ in range(n):
            total = total + cur
            cur = d_inc @ cur
        return SemidirectElement(total, t * s)
    gens = [_inner_or_raise(f) for f in fields]
    total_gen = sum(si * gi for si, gi in zip(s, gens))
    c_inc = expm(tau * total_gen)
    c_dec = expm(-tau * total_gen)
    prod = np.eye(spec.n)
    cur = e
    for _ in range(n):
        prod = prod @ cur
        cur = c_inc @ cur @ c_dec
    return SemidirectElement(prod, t * s)


def _inner_or_raise(f: LinearField) -> np.ndarray:
    gen = inner_generator(f)
    if gen is None:
        raise ValidationError("field has no inner generator")
    return gen
