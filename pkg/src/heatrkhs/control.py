"""Boundary control of the heat equation through its integral representation.

For the unit rod with zero initial temperature the state at time ``T`` is

    w(x, T) = -2 int_0^T dxtheta(x, T - tau) u_l(tau) dtau
              + 2 int_0^T dxtheta(x - 1, T - tau) u_r(tau) dtau,

and on the half line ``v(x, T) = -2 int_0^T dxK(x, T - t) u(t) dt``. Each
scenario writes the state as ``sign * <u, h_z>`` in L^2(0, T) (or its
two-channel product space), with feature map ``h_z(t)`` and reproducing
kernel ``<h_w, h_z>``. Minimal-norm controls are ``u = sum_j c_j h_{z_j}``
with ``(G + lam I) c = target / sign``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from .errors import DomainError, IllConditioned
from .geometry import RegionKind, contains
from .heat import (DEFAULT_POLICY, TruncationPolicy, dx_heat_kernel,
                   dx_kernel_time_integrals, dx_theta, dx_theta_time_integrals)
from .kernels import (ADMISSIBLE_MARGIN, KernelKind, KernelSpec, gram,
                      kernel_matrix)


class Scenario(str, enum.Enum):
    LEFT_ONLY = "left"
    RIGHT_ONLY = "right"
    ANTI_SYM = "antisym"    # u_r = -u_l
    SYM = "sym"             # u_r = u_l
    BOTH = "both"
    HALF_LINE = "half-line"


def scenario_of(name) -> Scenario:
    try:
        return Scenario(name)
    except ValueError:
        names = ", ".join(s.value for s in Scenario)
        raise DomainError(f"unknown scenario {name!r}; expected one of {names}") from None


KERNEL_OF = {
    Scenario.LEFT_ONLY: KernelKind.LEFT,
    Scenario.RIGHT_ONLY: KernelKind.RIGHT,
    Scenario.ANTI_SYM: KernelKind.PLUS,
    Scenario.SYM: KernelKind.MINUS,
    Scenario.BOTH: KernelKind.FULL,
    Scenario.HALF_LINE: KernelKind.HALF_LINE,
}

DOMAIN_OF = {
    Scenario.LEFT_ONLY: RegionKind.SQUARE_D,
    Scenario.RIGHT_ONLY: RegionKind.SHIFTED_D,
    Scenario.ANTI_SYM: RegionKind.SQUARE_Q,
    Scenario.SYM: RegionKind.SQUARE_Q,
    Scenario.BOTH: RegionKind.SQUARE_Q,
    Scenario.HALF_LINE: RegionKind.SECTOR,
}

# state = SIGN * <u, h_z>; the right control enters with +2.
SIGN = {s: -2.0 for s in Scenario}
SIGN[Scenario.RIGHT_ONLY] = 2.0

# Feature channels: h_z = sum coeff * conj(G_P(z + shift, T - t)), where G_2 is
# dxtheta, G_1 the period-1 sum and G_0 (period None) the free dxK.
_CHANNELS = {
    Scenario.LEFT_ONLY: [[(0.0, 2, 1.0)]],
    Scenario.RIGHT_ONLY: [[(1.0, 2, 1.0)]],
    Scenario.ANTI_SYM: [[(0.0, 1, 1.0)]],
    Scenario.SYM: [[(0.0, 2, 1.0), (1.0, 2, -1.0)]],
    Scenario.BOTH: [[(0.0, 2, 1.0)], [(1.0, 2, -1.0)]],
    Scenario.HALF_LINE: [[(0.0, None, 1.0)]],
}


def kernel_spec(scenario, T, policy: TruncationPolicy = DEFAULT_POLICY) -> KernelSpec:
    return KernelSpec(KERNEL_OF[scenario_of(scenario)], T, policy)


@dataclass(frozen=True)
class ControlSignal:
    """Control sampled at the cell midpoints ``t_k = (k + 1/2) T / M``.

    The signal is piecewise constant on the cells for the operator and
    linearly interpolated between midpoints when point values are needed.
    """

    T: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex).copy()
        if s.ndim != 1 or len(s) < 8:
            raise ValueError("a control signal needs at least 8 samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("control samples must be finite")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError("T must be finite and positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "T", float(self.T))

    @classmethod
    def from_function(cls, f: Callable, T: float, M: int) -> "ControlSignal":
        return cls(T, np.asarray(f(midpoints(T, M)), dtype=complex) * np.ones(M))

    @classmethod
    def zeros(cls, T: float, M: int) -> "ControlSignal":
        return cls(T, np.zeros(M, dtype=complex))

    @property
    def M(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return midpoints(self.T, self.M)

    def l2_norm(self) -> float:
        return math.sqrt(self.T / self.M * float(np.sum(np.abs(self.samples) ** 2)))

    def __call__(self, t):
        """Linear interpolation through the midpoints, extrapolated at both ends."""
        t = np.asarray(t, dtype=float)
        tk, u = self.times, self.samples
        h = self.T / self.M
        pos = np.clip((t - tk[0]) / h, 0.0, self.M - 1.000000001)
        k = np.floor(pos).astype(int)
        # extrapolate linearly beyond the first/last midpoint
        frac = (t - tk[k]) / h
        return u[k] + frac * (u[k + 1] - u[k])

    def __add__(self, other):
        _same_grid(self, other)
        return ControlSignal(self.T, self.samples + other.samples)

    def __mul__(self, alpha):
        return ControlSignal(self.T, complex(alpha) * self.samples)

    __rmul__ = __mul__

    def __neg__(self):
        return ControlSignal(self.T, -self.samples)


def midpoints(T: float, M: int) -> np.ndarray:
    return (np.arange(M) + 0.5) * (T / M)


def _same_grid(a: ControlSignal, b: ControlSignal):
    if a.M != b.M or a.T != b.T:
        raise ValueError("control signals must share T and the sample count")


@dataclass(frozen=True)
class StateField:
    """Values of a state ``w(., T)`` at a list of evaluation points."""

    points: np.ndarray
    values: np.ndarray
    T: float

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.points, dtype=complex))
        v = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if p.shape != v.shape or p.ndim != 1:
            raise ValueError("points and values must be 1-D lists of equal length")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "values", v)


def _check_points(scenario: Scenario, points):
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    ok = np.atleast_1d(contains(DOMAIN_OF[scenario], pts, ADMISSIBLE_MARGIN))
    if not ok.all():
        i = int(np.flatnonzero(~ok)[0])
        raise DomainError(
            f"{scenario.value}: point {pts[i]} is outside {DOMAIN_OF[scenario].value}")
    return pts


def _green(z, s, period, policy):
    if period is None:
        return dx_heat_kernel(z, s)
    return dx_theta(z, s, period, policy)


def _feature_channels(scenario: Scenario, z, T, t, policy):
    z = np.asarray(z, dtype=complex)
    s = T - np.asarray(t, dtype=float)
    if np.any((s <= 0) | (s >= T)):
        raise ValueError("feature times must lie strictly inside (0, T)")
    out = []
    for channel in _CHANNELS[scenario]:
        acc = 0
        for shift, period, coeff in channel:
            acc = acc + coeff * np.conj(_green(z + shift, s, period, policy))
        out.append(acc)
    return out


def feature(scenario, z, T, t, policy: TruncationPolicy = DEFAULT_POLICY):
    """Feature map ``h_z(t)`` of the scenario; `z` and `t` broadcast.

    The two-channel ``both`` scenario returns an array whose leading axis
    holds the (left, right) components ``(h_z, -h_{z+1})``.
    """
    scenario = scenario_of(scenario)
    _check_points(scenario, z)
    ch = _feature_channels(scenario, z, T, t, policy)
    return ch[0] if len(ch) == 1 else np.stack(np.broadcast_arrays(*ch))


def feature_gram(scenario, points, T, M: int = 4096,
                 policy: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Midpoint-rule Gram ``[<h_{z_j}, h_{z_i}>]`` of the feature functions."""
    scenario = scenario_of(scenario)
    pts = _check_points(scenario, points)
    t = midpoints(T, M)
    G = 0
    for H in _feature_channels(scenario, pts[:, None], T, t[None, :], policy):
        G = G + (np.conj(H) @ H.T) * (T / M)
    return G


def _cell_integrals(scenario: Scenario, pts, T, M, policy):
    # integral over tau-cell k of dxG(z + shift, T - tau), per channel
    s_edges = T - np.arange(M + 1) * (T / M)
    s_edges[-1] = 0.0
    out = []
    for channel in _CHANNELS[scenario]:
        acc = 0
        for shift, period, coeff in channel:
            zz = pts + shift
            if period is None:
                I = dx_kernel_time_integrals(zz, s_edges)
            else:
                I = dx_theta_time_integrals(zz, s_edges, period, policy)
            acc = acc + coeff * I
        out.append(acc)
    return out


def _scenario_controls(scenario: Scenario, u_left, u_right):
    if scenario is Scenario.BOTH:
        if u_left is None or u_right is None:
            raise ValueError("the 'both' scenario needs left and right controls")
        _same_grid(u_left, u_right)
        return [u_left, u_right]
    if scenario is Scenario.RIGHT_ONLY:
        u = u_right if u_right is not None else u_left
    else:
        u = u_left
    if u is None:
        raise ValueError(f"scenario {scenario.value!r} needs a control signal")
    return [u]


def apply_operator(scenario, u_left: ControlSignal | None, u_right: ControlSignal | None,
                   points, policy: TruncationPolicy = DEFAULT_POLICY) -> StateField:
    """State ``w(z, T)`` reached from rest under the given boundary controls.

    ``left``/``antisym``/``sym``/``half-line`` read `u_left` (the antisym/sym
    right control is derived from it); ``right`` reads `u_right` (or `u_left`
    when `u_right` is None); ``both`` needs both. Controls are piecewise
    constant on their cells and each cell integral of the Green function is
    evaluated exactly through its erfc antiderivative.
    """
    scenario = scenario_of(scenario)
    pts = _check_points(scenario, points)
    controls = _scenario_controls(scenario, u_left, u_right)
    T, M = controls[0].T, controls[0].M
    umax = max(float(np.max(np.abs(u.samples))) for u in controls)
    if umax == 0.0:
        return StateField(pts, np.zeros(len(pts), dtype=complex), T)
    tol = max(policy.tol / umax, 1e-15)
    pol = TruncationPolicy(tol, policy.max_half_width)
    values = 0
    for I, u in zip(_cell_integrals(scenario, pts, T, M, pol), controls):
        values = values + I @ u.samples
    return StateField(pts, SIGN[scenario] * values, T)


def _boundary_values(u, T, times):
    if u is None:
        return np.zeros(len(times), dtype=complex)
    if isinstance(u, ControlSignal):
        if abs(u.T - T) > 1e-14 * T:
            raise ValueError("control horizon differs from the oracle horizon")
        return np.asarray(u(times), dtype=complex)
    return np.asarray(u(times), dtype=complex) * np.ones(len(times))


def fd_oracle(u_left, u_right, nx: int, nt: int, points, T: float | None = None) -> StateField:
    """Crank-Nicolson reference solution of the controlled rod.

    Solves ``w_t = w_xx`` on (0, 1) with ``w(0, t) = u_l(t)``, ``w(1, t) = u_r(t)``,
    ``w(x, 0) = 0`` on a uniform grid with `nx` cells and `nt` steps, then
    interpolates ``w(., T)`` linearly at the real `points`. Controls may be
    :class:`ControlSignal` instances or callables of t (then `T` is required).
    """
    if nx < 100 or nt < 10 * nx:
        raise ValueError("fd_oracle needs nx >= 100 and nt >= 10 * nx")
    sig = next((u for u in (u_left, u_right) if isinstance(u, ControlSignal)), None)
    if T is None:
        if sig is None:
            raise ValueError("T is required when no ControlSignal is given")
        T = sig.T
    x_eval = np.asarray(points, dtype=complex)
    if np.any(x_eval.imag != 0) or np.any((x_eval.real <= 0) | (x_eval.real >= 1)):
        raise DomainError("fd_oracle evaluates only at real points in (0, 1)")
    dx, dt = 1.0 / nx, T / nt
    times = np.arange(nt + 1) * dt
    gl = _boundary_values(u_left, T, times)
    gr = _boundary_values(u_right, T, times)
    r = dt / (2.0 * dx * dx)
    n_in = nx - 1
    ab = np.zeros((3, n_in), dtype=complex)
    ab[0, 1:] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[2, :-1] = -r
    w = np.zeros(n_in, dtype=complex)
    for k in range(nt):
        rhs = (1.0 - 2.0 * r) * w
        rhs[1:] += r * w[:-1]
        rhs[:-1] += r * w[1:]
        rhs[0] += r * (gl[k] + gl[k + 1])
        rhs[-1] += r * (gr[k] + gr[k + 1])
        w = linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
    full = np.concatenate(([gl[-1]], w, [gr[-1]]))
    grid = np.linspace(0.0, 1.0, nx + 1)
    xr = x_eval.real
    vals = np.interp(xr, grid, full.real) + 1j * np.interp(xr, grid, full.imag)
    return StateField(x_eval, vals, T)


@dataclass(frozen=True)
class SynthesisResult:
    """Representer solution of a steering problem.

    `control` is the single control of one-channel scenarios (the right
    control for ``right``); for ``both`` it is the left control and
    `control_right` the right one. `norm_estimate` is the norm of the target
    in the reproducing-kernel space of the scenario,
    ``sqrt(f^* (G + lam I)^{-1} f)``.
    """

    coefficients: np.ndarray
    control: ControlSignal
    residual: float
    norm_estimate: float
    lam: float
    scenario: Scenario
    control_right: ControlSignal | None = None

    @property
    def control_norm(self) -> float:
        """L^2 norm of the synthesized control (both channels for ``both``)."""
        n2 = self.control.l2_norm() ** 2
        if self.control_right is not None:
            n2 += self.control_right.l2_norm() ** 2
        return math.sqrt(n2)

    def controls(self):
        """Arguments for :func:`apply_operator` reproducing the reached state."""
        if self.scenario is Scenario.BOTH:
            return self.control, self.control_right
        if self.scenario is Scenario.RIGHT_ONLY:
            return None, self.control
        return self.control, None


AUTO_LAMBDA_SCALE = 1e-10
MAX_ESCALATIONS = 6


def _factor(G, lam):
    try:
        return linalg.cho_factor(G + lam * np.eye(len(G)), lower=True)
    except linalg.LinAlgError:
        return None


def regularized_factor(G, lam="auto"):
    """Cholesky factor of ``G + lam I``; returns ``(factor, lam_used)``.

    ``lam="auto"`` starts at ``1e-10 trace(G) / n`` and escalates by 10x up to
    six times on failure. An explicit value is tried once.
    """
    n = len(G)
    tr = float(np.trace(G).real)
    if isinstance(lam, str):
        if lam != "auto":
            raise ValueError(f"unknown lambda rule {lam!r}")
        lam_v = AUTO_LAMBDA_SCALE * tr / n if tr > 0 else AUTO_LAMBDA_SCALE
        for _ in range(MAX_ESCALATIONS + 1):
            fac = _factor(G, lam_v)
            if fac is not None:
                return fac, lam_v
            lam_v *= 10.0
        raise IllConditioned(f"Cholesky of G + lam I failed up to lam={lam_v / 10:g}")
    lam_v = float(lam)
    if lam_v < 0:
        raise ValueError("lambda must be non-negative")
    fac = _factor(G, lam_v)
    if fac is None:
        raise IllConditioned(f"Cholesky of G + lam I failed at lam={lam_v:g}")
    return fac, lam_v


def discrepancy_lambda(G, rhs, noise: float, lo: float | None = None, hi: float | None = None,
                       iters: int = 60) -> float:
    """Regularization weight whose fit residual ``max|G c - rhs|`` matches `noise`.

    Bisection in log(lam); the fit residual grows with lam.
    """
    n = len(G)
    scale = float(np.trace(G).real) / n
    lo = 1e-16 * scale if lo is None else lo
    hi = 1e2 * scale if hi is None else hi

    def misfit(lam):
        fac = _factor(G, lam)
        if fac is None:
            return -np.inf
        c = linalg.cho_solve(fac, rhs)
        return float(np.max(np.abs(G @ c - rhs))) - noise

    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        if misfit(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi if _factor(G, lo) is None else lo


def min_norm_control(scenario, target: StateField, lam="auto", M: int = 8192,
                     policy: TruncationPolicy = DEFAULT_POLICY,
                     noise: float | None = None) -> SynthesisResult:
    """Tikhonov-regularized minimal-norm control steering rest to `target`.

    `lam` is ``"auto"``, ``"discrepancy"`` (requires `noise`, the tolerated
    max deviation of the reached state) or a non-negative number.
    """
    scenario = scenario_of(scenario)
    T = target.T
    pts = _check_points(scenario, target.points)
    f = target.values
    sign = SIGN[scenario]
    G = gram(kernel_spec(scenario, T, policy), pts).entries
    rhs = f / sign
    if isinstance(lam, str) and lam == "discrepancy":
        if noise is None or noise <= 0:
            raise ValueError("discrepancy rule needs a positive noise level")
        lam = discrepancy_lambda(G, rhs, noise / abs(sign))
    fac, lam_used = regularized_factor(G, lam)
    c = linalg.cho_solve(fac, rhs)
    t = midpoints(T, M)
    chans = _feature_channels(scenario, pts[:, None], T, t[None, :], policy)
    controls = [ControlSignal(T, c @ H) for H in chans]
    if scenario is Scenario.BOTH:
        u_l, u_r = controls
    elif scenario is Scenario.RIGHT_ONLY:
        u_l, u_r = None, controls[0]
    else:
        u_l, u_r = controls[0], None
    reached = apply_operator(scenario, u_l, u_r, pts, policy)
    residual = float(np.max(np.abs(reached.values - f)))
    # (G + lam I)^{-1} f = c * sign
    norm2 = float(np.real(np.vdot(f, c * sign)))
    return SynthesisResult(
        coefficients=c, control=controls[0], residual=residual,
        norm_estimate=math.sqrt(max(norm2, 0.0)), lam=lam_used, scenario=scenario,
        control_right=controls[1] if len(controls) == 2 else None)


def membership_residual(scenario, target: StateField, probe: StateField, lam="auto",
                        policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Max deviation at `probe` of the kernel interpolant fitted to `target`.

    Small values say the data look like a single element of the reachable
    space; this is a numerical diagnostic, not a membership test.
    """
    scenario = scenario_of(scenario)
    spec = kernel_spec(scenario, target.T, policy)
    fit = _check_points(scenario, target.points)
    pr = _check_points(scenario, probe.points)
    if np.intersect1d(fit, pr).size:
        raise DomainError("probe points must be disjoint from the fit points")
    G = gram(spec, fit).entries
    fac, _ = regularized_factor(G, lam)
    c = linalg.cho_solve(fac, target.values)
    pred = kernel_matrix(spec, pr, fit) @ c
    return float(np.max(np.abs(pred - probe.values)))


def collocation_matrix(scenario, points, T, M: int,
                       policy: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Discrete control-to-state map on the M-cell grid.

    Row ``i`` maps the stacked channel samples of a piecewise-constant control
    to ``w(z_i, T)``; shape ``(n_points, n_channels * M)``.
    """
    scenario = scenario_of(scenario)
    pts = _check_points(scenario, points)
    blocks = _cell_integrals(scenario, pts, T, M, policy)
    return SIGN[scenario] * np.hstack(blocks)
