import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatrkhs.errors import DomainError, TruncationFailure
from heatrkhs.geometry import sample_points
from heatrkhs.heat import (TruncationPolicy, certified_tail_bound, choose_half_width,
                           dx_heat_kernel, dx_kernel_time_integrals, dx_theta,
                           dx_theta_time_integrals, initial_half_width)

mp.mp.dps = 40


def mp_dxK(z, t):
    z, t = mp.mpc(z), mp.mpf(t)
    return -z / (4 * mp.sqrt(mp.pi) * t**1.5) * mp.exp(-z * z / (4 * t))


def mp_theta(z, t, period, width=50):
    return mp.fsum(mp_dxK(mp.mpc(z) + period * n, t) for n in range(-width, width + 1))


def close(a, b, tol):
    return abs(complex(a) - complex(b)) <= tol


times = st.floats(0.05, 3.0)
coords = st.floats(-2.0, 2.0)


def test_dxK_examples():
    assert dx_heat_kernel(0.0, 1.0) == 0
    expected = -math.exp(-0.25) / (4 * math.sqrt(math.pi))
    assert dx_heat_kernel(1.0, 1.0) == pytest.approx(expected, rel=1e-15)
    assert close(dx_heat_kernel(1.0, 1.0), mp_dxK(1, 1), 1e-16)


@given(coords, coords, times)
def test_dxK_odd_and_matches_mpmath(x, y, t):
    z = complex(x, y)
    assert dx_heat_kernel(-z, t) == -dx_heat_kernel(z, t)
    ref = complex(mp_dxK(z, t))
    assert abs(dx_heat_kernel(z, t) - ref) <= 1e-13 * max(1.0, abs(ref))


def test_dxK_underflow_is_clean():
    assert dx_heat_kernel(100.0, 1e-3) == 0
    with pytest.raises(ValueError):
        dx_heat_kernel(1.0, 0.0)
    with pytest.raises(ValueError):
        dx_heat_kernel(1.0, -1.0)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0])
def test_odd_points_vanish(t):
    assert abs(dx_theta(1.0, t, 2)) <= 1e-12
    assert abs(dx_theta(0.5, t, 1)) <= 1e-12


def test_brute_force_example():
    val = dx_theta(0.5, 0.5, 2, TruncationPolicy(1e-12))
    assert close(val, mp_theta(0.5, 0.5, 2), 1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), times, st.sampled_from([1, 2]))
def test_theta_matches_wide_window(seed, t, period):
    region = "square-d" if period == 2 else "square-q"
    z = complex(sample_points(region, 1, 0.01, seed)[0])
    assert close(dx_theta(z, t, period), mp_theta(z, t, period), 2e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), times)
def test_functional_equations(seed, t):
    tol = 1e-12
    pol = TruncationPolicy(tol)
    z = complex(sample_points("square-d", 1, 0.01, seed)[0])
    f = dx_theta(z, t, 2, pol)
    assert close(dx_theta(z + 2, t, 2, pol), f, 2 * tol)
    assert close(dx_theta(-z, t, 2, pol), -f, 2 * tol)
    q = complex(sample_points("square-q", 1, 0.01, seed)[0])
    g = dx_theta(q, t, 1, pol)
    assert close(dx_theta(q + 1, t, 1, pol), g, 2 * tol)
    assert close(dx_theta(-q, t, 1, pol), -g, 2 * tol)


def test_outside_periodized_domain():
    with pytest.raises(DomainError):
        dx_theta(1 + 1.5j, 1.0, 2)
    with pytest.raises(ValueError):
        dx_theta(0.5, 1.0, 3)


def test_small_t_reduces_to_single_term():
    z, t = 0.5 + 0.1j, 0.01
    val = dx_theta(z, t, 2, TruncationPolicy(1e-14))
    assert close(val, dx_heat_kernel(z, t), 1e-13)


def test_doubling_half_width_is_stable():
    pol = TruncationPolicy(1e-12)
    z = sample_points("square-d", 50, 0.05, 5)
    t = np.random.default_rng(5).uniform(0.05, 4.0, 50)
    N = choose_half_width(t, 2, pol)
    a = dx_theta(z, t, 2, pol)
    b = dx_theta(z, t, 2, pol, half_width=2 * N)
    assert np.max(np.abs(a - b)) < pol.tol


def test_truncation_failure():
    with pytest.raises(TruncationFailure):
        dx_theta(0.5, 500.0, 2, TruncationPolicy(1e-12, max_half_width=3))


@pytest.mark.parametrize("kw", [dict(tol=0.0), dict(tol=1e-16), dict(max_half_width=2),
                                dict(max_half_width=20_000)])
def test_policy_validation(kw):
    with pytest.raises(ValueError):
        TruncationPolicy(**kw)


@pytest.mark.parametrize("period", [1, 2])
@pytest.mark.parametrize("t", [0.1, 1.0, 4.0])
def test_tail_bound_nonincreasing(period, t):
    b = [certified_tail_bound(t, period, N) for N in range(2, 30)]
    assert all(x >= y for x, y in zip(b, b[1:]))


def test_tail_bound_example():
    assert certified_tail_bound(1.0, 2, 8, z=1 + 0.3j) < 1e-15
    with pytest.raises(DomainError):
        certified_tail_bound(1.0, 2, 8, z=1 + 1.5j)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.2, 6.0), st.integers(2, 5), st.sampled_from([1, 2]))
def test_tail_bound_dominates_true_tail(seed, t, N, period):
    region = "square-d" if period == 2 else "square-q"
    z = complex(sample_points(region, 1, 0.0, seed)[0])
    tail = mp.fsum(mp_dxK(mp.mpc(z) + period * n, t)
                   for n in list(range(-60, -N)) + list(range(N + 1, 61)))
    assert abs(complex(tail)) <= certified_tail_bound(t, period, N)


def test_initial_half_width_floor():
    assert initial_half_width(1e-4, 2, 1e-12) == 3


def mp_cell_integral(z, s0, s1):
    return mp.quad(lambda s: mp_dxK(z, s), [s0, s1])


@pytest.mark.parametrize("z", [0.3, 0.8 + 0.2j, 1.5 - 0.4j])
def test_time_integrals_match_quadrature(z):
    edges = np.array([1.0, 0.5, 0.1, 0.01, 0.0])
    got = dx_kernel_time_integrals(z, edges)
    ref = [complex(mp_cell_integral(z, b, a)) for a, b in zip(edges[:-1], edges[1:])]
    np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-15)


def test_theta_time_integrals_match_quadrature():
    z, edges = 0.4 + 0.1j, np.array([2.0, 1.0, 0.25, 0.0])
    got = dx_theta_time_integrals(z, edges, 2)
    ref = [complex(mp.quad(lambda s: mp_theta(z, s, 2, 20), [b, a]))
           for a, b in zip(edges[:-1], edges[1:])]
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-13)


def test_loose_budget_uses_minimal_window():
    # tolerances above the series constant (tiny controls scale the budget up)
    assert initial_half_width(1.0, 2, 10.0) == 3
    assert dx_theta(0.5, 1.0, 2, TruncationPolicy(10.0)) == dx_theta(0.5, 1.0, 2, half_width=3)
