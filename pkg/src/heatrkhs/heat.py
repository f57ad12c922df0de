"""Heat-kernel derivative and its periodizations.

``dx_heat_kernel`` is the entire extension of the spatial derivative of the
free heat kernel,

    dxK(z, t) = -z / (4 sqrt(pi) t^{3/2}) exp(-z^2 / (4t)),

and ``dx_theta`` sums its translates ``dxK(z + P n, t)`` over all integers
``n`` for the period ``P`` in {2, 1}. Period 2 is the Dirichlet influence
function of the unit rod; period 1 is the symmetric/antisymmetric variant.

Truncation of the lattice sum is certified. For ``z`` in the closed cell
``|y| <= min(x, P - x)`` and ``k >= 1`` one has

    |z + P k|  <= P (k + 1),   Re (z + P k)^2  >= P^2 k^2,
    |z - P k|  <= P k,         Re (z - P k)^2  >= P^2 (k - 1)^2   (k >= 2),

so both one-sided tails are dominated by Gaussian sequences whose successive
ratios decrease; the remainder past ``N`` is then bounded by a geometric
series started at ``N + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import DomainError, TruncationFailure
from .geometry import cell_representative, contains

SQRT_PI = math.sqrt(math.pi)
TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class TruncationPolicy:
    """Absolute tail budget and hard cap on the lattice half-width."""

    tol: float = 1e-12
    max_half_width: int = 1000

    def __post_init__(self):
        if not (self.tol >= 1e-15 and math.isfinite(self.tol)):
            raise ValueError(f"tol must be finite and >= 1e-15, got {self.tol}")
        if not 3 <= self.max_half_width <= 10_000:
            raise ValueError("max_half_width must lie in [3, 10000]")


DEFAULT_POLICY = TruncationPolicy()


def _check_period(period) -> float:
    p = float(period)
    if p not in (1.0, 2.0):
        raise ValueError(f"period must be 1 or 2, got {period!r}")
    return p


def _check_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t) & (t > 0)):
        raise ValueError("time parameter must be finite and strictly positive")
    return t


def _gauss_exp(a, t):
    # exp(-a^2/(4t)) split into modulus and phase so that a huge positive
    # real part underflows cleanly to 0 instead of producing inf * 0.
    a2 = a * a / (4.0 * t)
    return np.exp(-a2.real) * np.exp(-1j * a2.imag)


def dx_heat_kernel(z, t):
    """Analytic continuation of the spatial derivative of the heat kernel."""
    t = _check_time(t)
    z = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        out = -z / (4.0 * SQRT_PI * t**1.5) * _gauss_exp(z, t)
    return out[()] if out.ndim == 0 else out


def _geometric_tail(log_f, k0):
    # sum_{k >= k0} f(k) <= f(k0) / (1 - r), r = f(k0+1)/f(k0), valid when the
    # ratio sequence is non-increasing (true for every majorant used here).
    lf0 = log_f(k0)
    r = np.exp(log_f(k0 + 1) - lf0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.where(r < 1.0, np.exp(lf0) / (1.0 - r), np.inf)
    return out


def certified_tail_bound(t, period, N: int, z=None):
    """Upper bound on ``|sum_{|n|>N} dxK(z + P n, t)|`` over the closed cell.

    Vectorised over `t`. If `z` is given it is only used to check that the
    bound applies (z must lie in the closed fundamental cell).
    """
    P = _check_period(period)
    t = _check_time(t)
    if N < 2:
        raise ValueError("half-width N must be at least 2")
    if z is not None:
        zz = np.asarray(z, dtype=complex)
        if np.any((zz.real < 0) | (zz.real > P) | (np.abs(zz.imag) > np.minimum(zz.real, P - zz.real))):
            raise DomainError("tail bound applies only to the closed fundamental cell")
    pre = -np.log(4.0 * SQRT_PI * t**1.5)

    def log_pos(k):
        return pre + np.log(P * (k + 1)) - P * P * k * k / (4.0 * t)

    def log_neg(k):
        return pre + np.log(P * k) - P * P * (k - 1) ** 2 / (4.0 * t)

    bound = _geometric_tail(log_pos, N + 1) + _geometric_tail(log_neg, N + 1)
    bound = np.maximum(bound, TINY)
    return float(bound) if bound.ndim == 0 else bound


def integrated_tail_bound(T, period, N: int):
    """Bound on ``sum_{|n|>N} int_0^T |dxK(z + P n, s)| ds`` over the closed cell.

    Uses ``int_0^T |dxK(a, s)| ds = |a| erfc(sqrt(rho) / (2 sqrt(T))) / (2 sqrt(rho))``
    with ``rho = Re a^2`` and ``erfc(x) <= exp(-x^2)``.
    """
    P = _check_period(period)
    T = _check_time(T)
    if N < 2:
        raise ValueError("half-width N must be at least 2")
    # |a| / (2 sqrt(rho)) <= 1 on both sides for the cell bounds above
    bound = (_geometric_tail(lambda k: -P * P * k * k / (4.0 * T), N + 1)
             + _geometric_tail(lambda k: -P * P * (k - 1) ** 2 / (4.0 * T), N + 1))
    bound = np.maximum(bound, TINY)
    return float(bound) if bound.ndim == 0 else bound


def initial_half_width(t_max: float, period: float, tol: float) -> int:
    """Cutoff guess ``max(3, ceil(sqrt(4 t log(C/tol)) / P) + 2)``."""
    c = max(1.0, period / (2.0 * SQRT_PI * t_max**1.5))
    if c <= tol:  # a loose budget is met by the minimal window
        return 3
    return max(3, math.ceil(math.sqrt(4.0 * t_max * math.log(c / tol)) / period) + 2)


def choose_half_width(t, period, policy: TruncationPolicy = DEFAULT_POLICY,
                      bound=certified_tail_bound) -> int:
    """Smallest half-width (from the cutoff guess upward) whose tail bound is below tol at every t."""
    P = _check_period(period)
    t = np.atleast_1d(_check_time(t))
    n = initial_half_width(float(t.max()), P, policy.tol)
    while True:
        if n > policy.max_half_width:
            raise TruncationFailure(
                f"period-{P:g} lattice sum needs half-width > {policy.max_half_width} "
                f"for tol={policy.tol:g} at t={t.max():g}")
        if np.max(bound(t, P, n)) < policy.tol:
            return n
        n += 1


def _reduce(z, P):
    zc = cell_representative(z, P)
    kind = "periodized-d" if P == 2.0 else "periodized-q"
    if not np.all(contains(kind, zc)):
        raise DomainError(f"point outside the {kind} domain")
    return zc


def dx_theta(z, t, period=2, policy: TruncationPolicy = DEFAULT_POLICY,
             half_width: int | None = None):
    """Lattice sum ``sum_n dxK(z + P n, t)`` with certified truncation.

    `z` and `t` broadcast together. Points are first translated into the
    fundamental cell (real part in (0, P)), which leaves the value unchanged.
    Passing `half_width` overrides the certified cutoff.
    """
    P = _check_period(period)
    t = _check_time(t)
    zc = _reduce(np.asarray(z, dtype=complex), P)
    N = choose_half_width(t, P, policy) if half_width is None else int(half_width)
    n = np.arange(-N, N + 1)
    zb, tb = np.broadcast_arrays(zc, t)
    a = zb[..., None] + P * n
    tt = tb[..., None]
    with np.errstate(over="ignore", invalid="ignore"):
        terms = -a / (4.0 * SQRT_PI * tt**1.5) * _gauss_exp(a, tt)
    out = terms.sum(axis=-1)
    return out[()] if out.ndim == 0 else out


def _antiderivative(a, s):
    # Phi(a, s) with d/ds Phi = dxK(a, s); Phi(a, 0+) = 0 for Re a > 0.
    # For Re a < 0 use oddness in a so erfc is only taken in its decaying sector.
    sign = np.where(a.real < 0, -1.0, 1.0)
    b = sign * a
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = np.where(s > 0, b / (2.0 * np.sqrt(np.where(s > 0, s, 1.0))), np.inf)
    val = np.where(s > 0, erfc(np.where(np.isfinite(arg), arg, 0.0)), 0.0)
    return -0.5 * sign * val


def dx_kernel_time_integrals(z, s_edges):
    """Integrals of ``dxK(z, s)`` between consecutive entries of `s_edges`.

    Returns ``Phi(s_edges[k]) - Phi(s_edges[k+1])`` along the last axis, so a
    decreasing edge list (``s = T - tau`` on an increasing tau grid) yields the
    integrals over the tau-cells. Requires ``Re z > 0`` (sector points).
    """
    z = np.asarray(z, dtype=complex)
    s = np.asarray(s_edges, dtype=float)
    if np.any(s < 0):
        raise ValueError("time edges must be non-negative")
    phi = _antiderivative(z[..., None], s)
    return phi[..., :-1] - phi[..., 1:]


def dx_theta_time_integrals(z, s_edges, period=2,
                            policy: TruncationPolicy = DEFAULT_POLICY):
    """Cell integrals of the lattice sum, analogous to :func:`dx_kernel_time_integrals`.

    The half-width is certified so that the time-integrated absolute tail on
    ``[0, max(s_edges)]`` is below ``policy.tol``.
    """
    P = _check_period(period)
    zc = _reduce(np.asarray(z, dtype=complex), P)
    s = np.asarray(s_edges, dtype=float)
    s_max = float(s.max())
    N = choose_half_width(s_max, P, policy, bound=integrated_tail_bound)
    n = np.arange(-N, N + 1)
    a = zc[..., None] + P * n
    phi = _antiderivative(a[..., None], s).sum(axis=-2)
    return phi[..., :-1] - phi[..., 1:]
