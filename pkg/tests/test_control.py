import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatrkhs import verify
from heatrkhs.control import (ControlSignal, Scenario, StateField, apply_operator,
                              collocation_matrix, discrepancy_lambda, fd_oracle, feature,
                              feature_gram, kernel_spec, membership_residual, midpoints,
                              min_norm_control, regularized_factor)
from heatrkhs.errors import DomainError, IllConditioned
from heatrkhs.geometry import sample_points
from heatrkhs.kernels import KernelSpec, eval_kernel, gram

T = 1.0
X = np.linspace(0.1, 0.9, 10)


def signal(f, M=2048, T=T):
    return ControlSignal.from_function(f, T, M)


# ------------------------------------------------------------------ ControlSignal

def test_control_signal_grid_and_norm():
    u = ControlSignal(2.0, np.ones(16))
    np.testing.assert_allclose(u.times, (np.arange(16) + 0.5) / 8)
    assert u.l2_norm() == pytest.approx(math.sqrt(2.0))
    assert u.M == 16


def test_control_signal_validation():
    with pytest.raises(ValueError):
        ControlSignal(1.0, np.ones(7))
    with pytest.raises(ValueError):
        ControlSignal(1.0, np.r_[np.ones(8), np.nan])
    with pytest.raises(ValueError):
        ControlSignal(0.0, np.ones(8))
    with pytest.raises(ValueError):
        ControlSignal(1.0, np.ones(8)) + ControlSignal(1.0, np.ones(9))


def test_control_signal_is_read_only():
    u = ControlSignal(1.0, np.ones(8))
    with pytest.raises(ValueError):
        u.samples[0] = 2.0


def test_control_signal_interpolates_linear_functions_exactly():
    u = signal(lambda t: 3 * t - 1, M=64)
    t = np.array([0.0, 0.001, 0.37, 0.999, 1.0])
    np.testing.assert_allclose(u(t), 3 * t - 1, atol=1e-13)


def test_control_signal_arithmetic():
    a, b = signal(np.sin, 32), signal(np.cos, 32)
    np.testing.assert_allclose((2 * a + (-b)).samples, 2 * a.samples - b.samples)


# ------------------------------------------------------------------ features

def test_left_feature_vanishes_at_one():
    t = midpoints(T, 64)
    assert np.max(np.abs(feature("left", 1.0, T, t))) < 1e-12


@pytest.mark.parametrize("scenario", ["left", "antisym", "sym", "half-line"])
def test_feature_real_at_real_arguments(scenario):
    h = feature(scenario, np.array([[0.3], [0.7]]), T, midpoints(T, 64)[None, :])
    assert np.all(h.imag == 0)


def test_feature_rejects_bad_input():
    with pytest.raises(DomainError):
        feature("left", 2.5, T, 0.5)
    with pytest.raises(ValueError):
        feature("left", 0.5, T, 1.0)
    with pytest.raises(DomainError):
        feature("diagonal", 0.5, T, 0.5)


def test_both_feature_has_two_channels():
    h = feature("both", 0.4, T, midpoints(T, 16))
    assert h.shape == (2, 16)
    np.testing.assert_allclose(h[1], -feature("right", 0.4, T, midpoints(T, 16)))
    np.testing.assert_allclose(h[0], feature("left", 0.4, T, midpoints(T, 16)))


@pytest.mark.parametrize("scenario, region", verify.FEATURE_CASES)
def test_feature_gram_matches_kernel(scenario, region):
    pts = sample_points(region, 8, 0.1, 3)
    G = gram(kernel_spec(scenario, T), pts).entries
    assert np.max(np.abs(feature_gram(scenario, pts, T, 4096) - G)) < 1e-6


# ------------------------------------------------------------------ operator

def test_zero_controls_give_zero_field():
    u = ControlSignal.zeros(T, 64)
    for sc in Scenario:
        w = apply_operator(sc, u, u, X)
        assert np.all(w.values == 0)


def test_constant_left_control_matches_fd():
    u = signal(lambda t: 1.0 + 0 * t, M=4000)
    w = apply_operator("left", u, None, [0.5])
    ref = fd_oracle(lambda t: 1.0 + 0 * t, None, 400, 8000, [0.5], T=T)
    assert abs(w.values[0] - ref.values[0]) < 1e-4


def test_constant_left_control_matches_series_solution():
    # independent closed form for u = 1: w = 1 - x - (2/pi) sum sin(k pi x) e^{-k^2 pi^2 T}/k
    x = 0.3
    k = np.arange(1, 200)
    exact = 1 - x - 2 / np.pi * np.sum(np.sin(k * np.pi * x) * np.exp(-k**2 * np.pi**2 * T) / k)
    w = apply_operator("left", ControlSignal(T, np.ones(64)), None, [x])
    assert abs(w.values[0] - exact) < 1e-11


def test_right_control_mirrors_left():
    # u_r on the rod is u_l seen from the other end: w_r(x) = w_l(1 - x)
    u = signal(lambda t: t * np.exp(-t))
    wl = apply_operator("left", u, None, X).values
    wr = apply_operator("right", None, u, 1.0 - X).values
    np.testing.assert_allclose(wr, wl, atol=1e-13)


def test_sin_left_control_matches_fd():
    f = lambda t: np.sin(np.pi * t)  # noqa: E731
    w = apply_operator("both", signal(f, 8000), ControlSignal.zeros(T, 8000), X)
    ref = fd_oracle(f, None, 400, 8000, X, T=T)
    assert np.max(np.abs(w.values - ref.values)) < 1e-4


def test_scenario_algebra():
    assert verify.check_scenario_algebra().passed


@settings(max_examples=10, deadline=None)
@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       st.floats(-5, 5), st.integers(0, 1000))
def test_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    u1 = ControlSignal(T, rng.normal(size=256) + 1j * rng.normal(size=256))
    u2 = ControlSignal(T, rng.normal(size=256))
    lhs = apply_operator("sym", a * u1 + b * u2, None, X).values
    rhs = a * apply_operator("sym", u1, None, X).values + b * apply_operator("sym", u2, None, X).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, abs(a), abs(b))


def test_operator_rejects_mismatched_input():
    u = ControlSignal.zeros(T, 64)
    with pytest.raises(ValueError):
        apply_operator("both", u, None, X)
    with pytest.raises(ValueError):
        apply_operator("both", u, ControlSignal.zeros(T, 32), X)
    with pytest.raises(DomainError):
        apply_operator("left", u, None, [2.5])


def test_collocation_matrix_reproduces_operator():
    u = signal(lambda t: np.cos(5 * t), 512)
    A = collocation_matrix("left", X, T, 512)
    np.testing.assert_allclose(A @ u.samples, apply_operator("left", u, None, X).values,
                               atol=1e-14)


# ------------------------------------------------------------------ fd oracle

def test_fd_zero():
    w = fd_oracle(None, None, 100, 1000, X, T=T)
    assert np.all(w.values == 0)


def test_fd_self_convergence():
    f = lambda t: np.sin(np.pi * t)  # noqa: E731
    g = lambda t: t * (1 - t)  # noqa: E731
    a = fd_oracle(f, g, 200, 2000, X, T=T).values
    b = fd_oracle(f, g, 400, 4000, X, T=T).values
    assert np.max(np.abs(a - b)) < 1e-5


@pytest.mark.parametrize("kw", [dict(nx=50, nt=1000), dict(nx=100, nt=500)])
def test_fd_parameter_checks(kw):
    with pytest.raises(ValueError):
        fd_oracle(None, None, points=X, T=T, **kw)


def test_fd_points_must_be_interior_reals():
    with pytest.raises(DomainError):
        fd_oracle(None, None, 100, 1000, [0.5 + 0.1j], T=T)
    with pytest.raises(ValueError):
        fd_oracle(None, None, 100, 1000, X)


# ------------------------------------------------------------------ synthesis

def test_zero_target():
    res = min_norm_control("left", StateField(X, np.zeros(10), T), M=256)
    assert np.all(res.coefficients == 0)
    assert np.all(res.control.samples == 0)
    assert res.residual == 0 and res.norm_estimate == 0


def test_roundtrip():
    c = verify.check_roundtrip()
    assert c.passed, c.line()


def test_kernel_section_norm():
    c = verify.check_kernel_section()
    assert c.passed, c.line()


def test_norm_estimate_and_control_norm():
    # target = -2 L u, so the cheapest control costs half the kernel-space norm
    target = apply_operator("left", signal(lambda t: np.sin(np.pi * t), 8192), None, X)
    res = min_norm_control("left", target, M=8192)
    # the regularization accounts for the gap: |u|^2 = norm^2 / 4 - lam |c|^2
    c = res.coefficients
    expected = res.norm_estimate**2 / 4 - res.lam * np.vdot(c, c).real
    assert res.control_norm**2 == pytest.approx(expected, rel=1e-6)
    assert res.control_norm <= res.norm_estimate / 2


@pytest.mark.parametrize("scenario", [s.value for s in Scenario])
def test_every_scenario_roundtrip(scenario):
    # targets produced by a known control are reachable by construction
    u = signal(lambda t: t**2 * (1 - t) + 0.5j * np.sin(3 * t), M=8192)
    pts = X if scenario != "half-line" else X + 0.05j
    target = apply_operator(scenario, u, u, pts)
    res = min_norm_control(scenario, target, M=8192)
    scale = np.max(np.abs(target.values))
    assert res.residual <= 1e-3 * scale
    reached = apply_operator(scenario, *res.controls(), pts)
    np.testing.assert_allclose(reached.values, target.values, atol=1e-3 * scale)
    assert (res.control_right is not None) == (scenario == "both")
    n_star = math.hypot(u.l2_norm(), u.l2_norm() if scenario == "both" else 0.0)
    assert res.control_norm <= 1.01 * n_star


def test_min_norm_optimality():
    c = verify.check_min_norm_optimality()
    assert c.passed, c.line()


def test_half_line_time_rescaling():
    c = verify.check_half_line_control_scaling()
    assert c.passed, c.line()


def test_explicit_lambda_and_ill_conditioning():
    with pytest.raises(IllConditioned):
        regularized_factor(np.zeros((2, 2)), 0.0)
    with pytest.raises(ValueError):
        regularized_factor(np.eye(2), -1.0)
    with pytest.raises(ValueError):
        regularized_factor(np.eye(2), "sometimes")
    _, lam = regularized_factor(np.zeros((2, 2)), "auto")
    assert lam > 0


def test_discrepancy_rule_hits_noise_level():
    spec = KernelSpec("left", T)
    G = gram(spec, X).entries
    rhs = np.sin(np.pi * X)
    lam = discrepancy_lambda(G, rhs, 1e-4)
    fac, _ = regularized_factor(G, lam)
    from scipy.linalg import cho_solve
    misfit = np.max(np.abs(G @ cho_solve(fac, rhs) - rhs))
    assert misfit == pytest.approx(1e-4, rel=1e-3)
    res = min_norm_control("left", StateField(X, -2 * rhs, T), lam="discrepancy",
                           noise=2e-4, M=1024)
    assert res.lam == pytest.approx(lam, rel=1e-6)


# ------------------------------------------------------------------ membership

def _section(y0, pts):
    return eval_kernel(KernelSpec("left", T), pts, y0)


# stay clear of x = 1, where every left-reachable state vanishes
FIT = np.linspace(0.1, 0.9, 12)
PROBE = np.linspace(0.15, 0.85, 7)


def test_membership_of_kernel_section():
    r = membership_residual("left", StateField(FIT, _section(0.6, FIT), T),
                            StateField(PROBE, _section(0.6, PROBE), T))
    assert r <= 1e-6


def test_membership_pole_function_is_worse():
    f = lambda x: 1.0 / (x + 0.02)  # noqa: E731
    r_pole = membership_residual("left", StateField(FIT, f(FIT), T), StateField(PROBE, f(PROBE), T))
    r_sec = membership_residual("left", StateField(FIT, _section(0.6, FIT), T),
                                StateField(PROBE, _section(0.6, PROBE), T))
    assert r_pole >= 10 * r_sec


def test_membership_monotone_in_lambda():
    f = _section(0.6, FIT)
    vals = [membership_residual("left", StateField(FIT, f, T),
                                StateField(PROBE, _section(0.6, PROBE), T), lam=lam)
            for lam in (1e-12, 1e-9, 1e-6, 1e-3)]
    assert all(a <= b * (1 + 1e-9) for a, b in zip(vals, vals[1:]))


def test_membership_probe_must_be_disjoint():
    with pytest.raises(DomainError):
        membership_residual("left", StateField(FIT, FIT, T), StateField(FIT[:2], FIT[:2], T))


def test_state_field_shapes():
    with pytest.raises(ValueError):
        StateField([0.1, 0.2], [1.0], T)
