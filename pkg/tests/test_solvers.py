import numpy as np
import pytest

from lieaffine.catalog import (commuting_inner_catalog, gl2_diag_pair,
                               gl2_linear, heis3_invariant, r1_translation,
                               r2_bilinear, so3_invariant)
from lieaffine.errors import ConvergenceError, InputError, ValidationError
from lieaffine.groups import (abelian_rn, general_linear_plus, group_membership,
                              identity_element, inner_field, random_element,
                              semidirect_exp, zero_field)
from lieaffine.matcore import expm, frobenius_distance
from lieaffine.solvers import (SolveOptions, product_formula_fixed_n, simulate,
                               solve_closed_inner, solve_from_point,
                               solve_piecewise, solve_product_formula,
                               solve_rk4)
from lieaffine.systems import AffineSystem, ControlSignal, parse_signal, validate

from conftest import oracle_rk4

# frozen reference: expm(A+B1) expm(-A) for A=diag(1,-1), B1=[[0,1],[0,0]]
# equals [[1, (e^2-1)/2], [0, 1]]; the entry below was evaluated at 50 digits
GL2_CLOSED_U1_T1 = np.array([[1.0, 3.194528049465325], [0.0, 1.0]])


def _bilinear_gl2():
    spec = general_linear_plus(2)
    return AffineSystem(
        spec,
        inner_field(spec, np.diag([1.0, -1.0])),
        np.zeros((2, 2)),
        ((inner_field(spec, np.diag([0.5, 2.0])), np.zeros((2, 2))),),
        (-1.0, 1.0),
    )


# ----------------------------------------------------------- closed form

def test_closed_inner_frozen_value():
    out = solve_closed_inner(gl2_linear(), [1.0], 1.0)
    assert frobenius_distance(out, GL2_CLOSED_U1_T1) <= 1e-13


def test_closed_inner_zero_control():
    sys_ = gl2_diag_pair()
    t = 0.7
    x = sys_.drift_field.generator
    w = sys_.drift_invariant
    expected = expm(t * (x + w)) @ expm(-t * x)
    assert frobenius_distance(solve_closed_inner(sys_, [0.0], t), expected) <= 1e-12


def test_closed_inner_bilinear_fixes_identity():
    out = solve_closed_inner(_bilinear_gl2(), [0.8], 1.3)
    assert frobenius_distance(out, np.eye(2)) <= 1e-12


def test_closed_inner_pure_invariant():
    sys_ = heis3_invariant()
    u = np.array([0.4])
    t = 1.1
    w = sys_.drift_invariant + u[0] * sys_.controlled[0][1]
    assert frobenius_distance(solve_closed_inner(sys_, u, t), expm(t * w)) <= 1e-12


# -------------------------------------------------------- product formula

def test_fixed_n_error_decreases_as_n_doubles():
    sys_ = gl2_linear()
    exact = solve_closed_inner(sys_, [1.0], 1.0)
    errs = [frobenius_distance(product_formula_fixed_n(sys_, [1.0], 1.0, n), exact)
            for n in (64, 128, 256, 512, 1024, 2048, 4096)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_doubling_loop_terminates_and_agrees():
    sys_ = gl2_linear()
    opts = SolveOptions(convergence_tol=1e-10)
    out = solve_product_formula(sys_, [1.0], 1.0, opts)
    assert frobenius_distance(out, GL2_CLOSED_U1_T1) <= 1e-8


def test_doubling_loop_gives_up_with_tiny_budget():
    sys_ = gl2_linear()
    opts = SolveOptions(n_initial=2, n_max=8, convergence_tol=1e-14)
    with pytest.raises(ConvergenceError) as exc:
        solve_product_formula(sys_, [1.0], 1.0, opts)
    a, b = exc.value.last_two
    assert a.shape == (2, 2) and b.shape == (2, 2)


def test_product_formula_abelian_power_sum():
    sys_ = r2_bilinear()
    out = solve_product_formula(sys_, [0.5], 0.8)
    ref = oracle_rk4(sys_, identity_element(sys_.group), [0.5], 0.8, dt=1e-4)
    assert np.linalg.norm(out - ref) <= 1e-6


def test_noncommuting_rejected_then_forced():
    spec = general_linear_plus(2)
    e12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    sys_ = AffineSystem(spec, inner_field(spec, e12), np.zeros((2, 2)),
                        ((inner_field(spec, e12.T.copy()), np.zeros((2, 2))),), None)
    with pytest.raises(ValidationError):
        solve_product_formula(sys_, [1.0], 0.5)
    out = product_formula_fixed_n(sys_, [1.0], 0.5, 256, force=True)
    assert out.shape == (2, 2)


def test_zero_time_is_exact_identity():
    sys_ = gl2_linear()
    e = identity_element(sys_.group)
    assert np.array_equal(solve_closed_inner(sys_, [1.0], 0.0), e)
    assert np.array_equal(solve_product_formula(sys_, [1.0], 0.0), e)
    assert np.array_equal(product_formula_fixed_n(sys_, [1.0], 0.0, 64), e)


# --------------------------------------------------------- arbitrary point

def test_from_point_identity_matches_identity_solver():
    sys_ = gl2_diag_pair()
    e = identity_element(sys_.group)
    a = solve_from_point(sys_, e, [0.3], 0.9)
    b = solve_closed_inner(sys_, [0.3], 0.9)
    assert frobenius_distance(a, b) <= 1e-10


@pytest.mark.parametrize("name", sorted(commuting_inner_catalog()))
def test_from_point_matches_independent_rk4(name):
    sys_ = commuting_inner_catalog()[name]
    rng = np.random.default_rng(17)
    for _ in range(3):
        g = random_element(sys_.group, rng, 0.5)
        u = rng.uniform(-1.0, 1.0, size=sys_.m)
        t = rng.uniform(0.2, 1.0)
        ours = solve_from_point(sys_, g, u, t)
        ref = oracle_rk4(sys_, g, u, t, dt=1e-4)
        assert frobenius_distance(ours, ref) <= 1e-6


def test_from_point_bilinear_rn_formula():
    # e^{tA} e^{u1 t B1} x with commuting diagonal factors, frozen endpoints
    sys_ = r2_bilinear()
    x = np.array([1.0, 1.0])
    out = solve_from_point(sys_, x, [1.0], 0.5)
    expected = np.array([7.38905609893065, 1.6487212707001282])  # (e^2, e^0.5)
    assert np.linalg.norm(out - expected) <= 1e-10


def test_from_point_zero_time():
    sys_ = gl2_linear()
    g = np.array([[2.0, 1.0], [0.0, 0.5]])
    assert np.array_equal(solve_from_point(sys_, g, [0.7], 0.0), g)


# ------------------------------------------------------------- piecewise

def test_piecewise_segment_merging():
    sys_ = gl2_diag_pair()
    e = identity_element(sys_.group)
    one = solve_piecewise(sys_, e, parse_signal("1.0:0.4", 1))
    two = solve_piecewise(sys_, e, parse_signal("0.5:0.4;0.5:0.4", 1))
    assert frobenius_distance(one.endpoint, two.endpoint) <= 1e-9


def test_piecewise_cocycle_against_split_solve():
    sys_ = gl2_diag_pair()
    rng = np.random.default_rng(23)
    g = random_element(sys_.group, rng, 0.5)
    u, v = rng.uniform(-1.0, 1.0, size=(2, 1))
    t, s = 0.6, 0.7
    sig = ControlSignal(((t, u), (s, v)))
    joined = solve_piecewise(sys_, g, sig).endpoint
    mid = solve_from_point(sys_, g, u, t)
    tail = solve_from_point(sys_, mid, v, s)
    assert frobenius_distance(joined, tail) <= 1e-10


def test_piecewise_sampling_grid():
    sys_ = gl2_linear()
    e = identity_element(sys_.group)
    traj = solve_piecewise(sys_, e, parse_signal("0.5:1.0;0.5:-1.0", 1),
                           samples_per_segment=4)
    assert traj.times.shape == (9,)
    assert np.allclose(np.diff(traj.times), 0.125)
    assert not traj.forced
    assert traj.method in ("closed_inner", "product_formula")


def test_piecewise_refuses_noncommuting_without_force():
    spec = general_linear_plus(2)
    e12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    sys_ = AffineSystem(spec, inner_field(spec, e12), np.zeros((2, 2)),
                        ((inner_field(spec, e12.T.copy()), np.zeros((2, 2))),), None)
    e = identity_element(spec)
    sig = parse_signal("0.5:1.0", 1)
    with pytest.raises(ValidationError):
        solve_piecewise(sys_, e, sig)
    traj = solve_piecewise(sys_, e, sig,
                           SolveOptions(method="product_formula", force=True))
    assert traj.forced


def test_piecewise_endpoint_vs_oracle():
    sys_ = gl2_diag_pair()
    e = identity_element(sys_.group)
    sig = parse_signal("0.4:0.9;0.3:-0.5;0.3:0.1", 1)
    ours = solve_piecewise(sys_, e, sig).endpoint
    g = e
    for dur, u in sig.segments:
        g = oracle_rk4(sys_, g, u, dur, dt=1e-4)
    assert frobenius_distance(ours, g) <= 1e-6


# ------------------------------------------------------------------- rk4

def test_rk4_zero_system_is_constant():
    spec = general_linear_plus(2)
    sys_ = AffineSystem(spec, zero_field(spec), np.zeros((2, 2)), (), None)
    g = np.array([[2.0, 1.0], [0.0, 3.0]])
    traj = solve_rk4(sys_, g, parse_signal("1.0:", 0), dt=1e-2)
    assert frobenius_distance(traj.endpoint, g) <= 1e-12


def test_rk4_invariant_endpoint():
    sys_ = heis3_invariant()
    u = np.array([0.5])
    w = sys_.drift_invariant + u[0] * sys_.controlled[0][1]
    traj = solve_rk4(sys_, identity_element(sys_.group),
                     ControlSignal(((1.0, u),)), dt=1e-3)
    assert frobenius_distance(traj.endpoint, expm(w)) <= 1e-8


def test_rk4_is_fourth_order():
    sys_ = so3_invariant()
    e = identity_element(sys_.group)
    u = np.array([0.7])
    w = sys_.drift_invariant + u[0] * sys_.controlled[0][1]
    exact = expm(w)
    errs = []
    for dt in (0.02, 0.01):
        traj = solve_rk4(sys_, e, ControlSignal(((1.0, u),)), dt=dt)
        errs.append(frobenius_distance(traj.endpoint, exact))
    ratio = errs[0] / errs[1]
    assert 10.0 <= ratio <= 22.0


def test_rk4_keeps_so3_on_manifold():
    sys_ = so3_invariant()
    traj = solve_rk4(sys_, identity_element(sys_.group),
                     parse_signal("2.0:0.9", 1), dt=1e-2, samples_per_segment=8)
    for p in traj.points:
        assert group_membership(sys_.group, p)


def test_rk4_abelian_translation():
    sys_ = r1_translation()
    traj = solve_rk4(sys_, np.zeros(1), parse_signal("2.5:", 0), dt=1e-3)
    assert np.allclose(traj.endpoint, [2.5], atol=1e-10)


# ------------------------------------------------------------ dispatching

def test_simulate_auto_uses_closed_for_commuting_inner():
    sys_ = gl2_linear()
    traj = simulate(sys_, identity_element(sys_.group), parse_signal("0.5:1.0", 1))
    assert traj.method == "closed_inner"


def test_simulate_auto_uses_product_for_abelian_maps():
    sys_ = r2_bilinear()
    traj = simulate(sys_, np.zeros(2), parse_signal("0.5:1.0", 1))
    assert traj.method == "product_formula"


def test_simulate_rk4_dispatch():
    sys_ = gl2_linear()
    traj = simulate(sys_, identity_element(sys_.group), parse_signal("0.5:1.0", 1),
                    SolveOptions(method="rk4"))
    assert traj.method == "rk4"


def test_method_validation():
    sys_ = gl2_linear()
    with pytest.raises(InputError):
        SolveOptions(method="simpson")
    with pytest.raises(InputError):
        solve_piecewise(sys_, identity_element(sys_.group),
                        parse_signal("0.5:1.0,2.0", 2))  # arity mismatch


# ------------------------------------------------------------- semidirect

def test_semidirect_exp_matches_fixed_n_product():
    sys_ = gl2_diag_pair()
    fields = [sys_.drift_field, sys_.controlled[0][0]]
    u = np.array([0.6])
    t = 0.9
    n = 512
    w = sys_.drift_invariant + u[0] * sys_.controlled[0][1]
    s = np.concatenate(([1.0], u))
    semi = semidirect_exp(fields, w, s, t, n)
    prod = product_formula_fixed_n(sys_, u, t, n)
    assert frobenius_distance(semi.g, prod) <= 1e-10
    assert np.allclose(semi.r, t * s)
