"""Reproducing kernels of the reachable spaces and their Gram matrices.

Every kernel here is Hermitian, ``K(w, z) = conj(K(z, w))``, and positive
definite on its admissible domain. The finite-rod kernels are lattice sums of
the sector kernel

    K0(z, w; T) = (z conj(w) / pi) exp(-S / 4T) (1/S^2 + 1/(4 T S)),
    S = z^2 + conj(w)^2,

over translates of both arguments (period 2 for the one-sided spaces,
period 1 for the symmetric/antisymmetric ones).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleProximity, TruncationFailure
from .geometry import RegionKind, contains
from .heat import (DEFAULT_POLICY, SQRT_PI, TruncationPolicy, _check_time,
                   certified_tail_bound, initial_half_width)

ADMISSIBLE_MARGIN = 1e-6
POLE_GUARD = 1e-12


class KernelKind(str, enum.Enum):
    K0 = "k0"
    LEFT = "left"
    RIGHT = "right"
    PLUS = "plus"
    MINUS = "minus"
    FULL = "full"
    HALF_LINE = "half-line"
    BERGMAN_SECTOR = "bergman-sector"
    HARDY_PULLBACK = "hardy-pullback"
    BERGMAN_HALFPLANE = "bergman-halfplane"


DOMAIN_OF = {
    KernelKind.K0: RegionKind.SECTOR,
    KernelKind.HALF_LINE: RegionKind.SECTOR,
    KernelKind.BERGMAN_SECTOR: RegionKind.SECTOR,
    KernelKind.HARDY_PULLBACK: RegionKind.SECTOR,
    KernelKind.LEFT: RegionKind.SQUARE_D,
    KernelKind.RIGHT: RegionKind.SHIFTED_D,
    KernelKind.PLUS: RegionKind.SQUARE_Q,
    KernelKind.MINUS: RegionKind.SQUARE_Q,
    KernelKind.FULL: RegionKind.SQUARE_Q,
    KernelKind.BERGMAN_HALFPLANE: RegionKind.HALF_PLANE,
}

SERIES_KINDS = frozenset({KernelKind.LEFT, KernelKind.RIGHT, KernelKind.PLUS,
                          KernelKind.MINUS, KernelKind.FULL})


def kernel_kind(kind) -> KernelKind:
    try:
        return KernelKind(kind)
    except ValueError:
        names = ", ".join(k.value for k in KernelKind)
        raise DomainError(f"unknown kernel {kind!r}; expected one of {names}") from None


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel, its time horizon and the truncation policy for lattice sums.

    `T` is ignored by the Bergman and Hardy pullback kernels.
    """

    kind: KernelKind
    T: float = 1.0
    truncation: TruncationPolicy = DEFAULT_POLICY

    def __post_init__(self):
        object.__setattr__(self, "kind", kernel_kind(self.kind))
        _check_time(self.T)

    @property
    def domain(self) -> RegionKind:
        return DOMAIN_OF[self.kind]


def _pole_check(S):
    if np.any(np.abs(S) < POLE_GUARD):
        raise PoleProximity("z^2 + conj(w)^2 is within 1e-12 of zero")


def eval_K0(z, w, T):
    """Closed-form sector kernel K0(z, w; T); broadcasts over `z` and `w`."""
    T = float(_check_time(T))
    z = np.asarray(z, dtype=complex)
    wc = np.conj(np.asarray(w, dtype=complex))
    S = z * z + wc * wc
    _pole_check(S)
    out = _k0_terms(z, wc, S, T)
    return out[()] if out.ndim == 0 else out


def _k0_terms(a, bc, S, T):
    e = S / (4.0 * T)
    with np.errstate(over="ignore", invalid="ignore"):
        damp = np.exp(-e.real) * np.exp(-1j * e.imag)
        return a * bc / math.pi * damp * (1.0 / (S * S) + 1.0 / (4.0 * T * S))


def half_line_kernel(z, w, T):
    """Half-line reachable-space kernel, written as Bergman plus Hardy pullbacks.

    ``(1/4pi) e^{-z^2/4T} e^{-conj(w)^2/4T} (4 z w*/S^2 + z w*/(T S))``;
    algebraically identical to :func:`eval_K0`.
    """
    T = float(_check_time(T))
    z = np.asarray(z, dtype=complex)
    wc = np.conj(np.asarray(w, dtype=complex))
    S = z * z + wc * wc
    _pole_check(S)
    zw = z * wc
    with np.errstate(over="ignore", invalid="ignore"):
        out = (np.exp(-z * z / (4.0 * T)) * np.exp(-wc * wc / (4.0 * T)) / (4.0 * math.pi)
               * (4.0 * zw / (S * S) + zw / (T * S)))
    return out[()] if out.ndim == 0 else out


def bergman_sector(z, w):
    """Bergman kernel of the sector, ``4 z conj(w) / (z^2 + conj(w)^2)^2``."""
    z = np.asarray(z, dtype=complex)
    wc = np.conj(np.asarray(w, dtype=complex))
    S = z * z + wc * wc
    _pole_check(S)
    out = 4.0 * z * wc / (S * S)
    return out[()] if out.ndim == 0 else out


def hardy_pullback(z, w):
    """Hardy kernel of the right half-plane pulled back by ``z -> z^2``."""
    z = np.asarray(z, dtype=complex)
    wc = np.conj(np.asarray(w, dtype=complex))
    S = z * z + wc * wc
    _pole_check(S)
    out = 1.0 / S
    return out[()] if out.ndim == 0 else out


def bergman_halfplane(z, w):
    """Bergman kernel of Re z > 0 for the 1/pi-weighted area inner product."""
    z = np.asarray(z, dtype=complex)
    s = z + np.conj(np.asarray(w, dtype=complex))
    _pole_check(s)
    out = 1.0 / (s * s)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class LatticeSum:
    value: np.ndarray
    half_width: int
    tail_bound: float


def _lattice_bound(alpha_win, beta_win, tail_1d, T, P, N):
    # Outside the window max(|n|,|m|) > N, so Re S >= P^2 N^2 (the other index
    # contributes Re(.)^2 >= 0 on the closed cell) and |S| >= Re S.
    s = P * P * N * N
    factor = (1.0 / (s * s) + 1.0 / (4.0 * T * s)) / math.pi
    return factor * ((alpha_win + tail_1d) * (beta_win + tail_1d) - alpha_win * beta_win)


def lattice_sum(z, w, T, period, alternating: bool = False,
                policy: TruncationPolicy = DEFAULT_POLICY,
                half_width: int | None = None) -> LatticeSum:
    """``sum_{n,m} (+-1)^{n+m} K0(z + P n, w + P m; T)`` with a certified tail.

    `z` and `w` broadcast together and must lie in the closed fundamental cell
    of period `P` (real part in [0, P]). The window |n|, |m| <= N grows from the
    cutoff guess until the certified remainder is below ``policy.tol``; pass
    `half_width` to force a window (its bound is still reported).
    """
    T = float(_check_time(T))
    P = float(period)
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    pre = 4.0 * SQRT_PI * T**1.5

    def window_abs(N, pts):
        a = pts[..., None] + P * np.arange(-N, N + 1)
        return np.sum(np.abs(a) * np.exp(-(a * a).real / (4.0 * T)), axis=-1)

    def bound(N):
        tail_1d = certified_tail_bound(T, P, N) * pre
        return float(np.max(_lattice_bound(window_abs(N, z), window_abs(N, w), tail_1d, T, P, N),
                            initial=0.0))

    if half_width is None:
        N = max(2, initial_half_width(T, P, policy.tol) - 2)
        while N <= policy.max_half_width and bound(N) >= policy.tol:
            N += 1
        if N > policy.max_half_width:
            raise TruncationFailure(
                f"double lattice sum needs half-width > {policy.max_half_width}")
    else:
        N = int(half_width)
    n = np.arange(-N, N + 1)
    a = z[..., None, None] + P * n[:, None]
    bc = np.conj(w[..., None, None] + P * n[None, :])
    S = a * a + bc * bc
    terms = _k0_terms(a, bc, S, T)
    if alternating:
        terms = terms * ((-1.0) ** (n[:, None] + n[None, :]))
    value = terms.sum(axis=(-2, -1))
    return LatticeSum(value[()] if value.ndim == 0 else value, N, bound(N))


def _check_domain(spec: KernelSpec, *pts):
    for p in pts:
        ok = contains(spec.domain, p, ADMISSIBLE_MARGIN)
        if not np.all(ok):
            bad = np.asarray(p, dtype=complex)[~np.asarray(ok)] if np.ndim(ok) else np.asarray(p)
            raise DomainError(
                f"{spec.kind.value} kernel: point {complex(np.ravel(bad)[0])} is not in "
                f"{spec.domain.value} (margin {ADMISSIBLE_MARGIN:g})")


def _left(z, w, spec, half_width=None):
    return lattice_sum(z, w, spec.T, 2, policy=spec.truncation, half_width=half_width).value


def eval_kernel(spec: KernelSpec, z, w, half_width: int | None = None, check: bool = True):
    """Evaluate the kernel selected by `spec` at ``(z, w)``; broadcasts.

    `half_width` forces the lattice window of the series kinds (used to test
    truncation stability); it is ignored by closed-form kinds.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if check:
        _check_domain(spec, z, w)
    k = spec.kind
    if k is KernelKind.K0:
        return eval_K0(z, w, spec.T)
    if k is KernelKind.HALF_LINE:
        return half_line_kernel(z, w, spec.T)
    if k is KernelKind.BERGMAN_SECTOR:
        return bergman_sector(z, w)
    if k is KernelKind.HARDY_PULLBACK:
        return hardy_pullback(z, w)
    if k is KernelKind.BERGMAN_HALFPLANE:
        return bergman_halfplane(z, w)
    if k is KernelKind.LEFT:
        return _left(z, w, spec, half_width)
    if k is KernelKind.RIGHT:
        return _left(z + 1, w + 1, spec, half_width)
    if k is KernelKind.PLUS:
        return lattice_sum(z, w, spec.T, 1, policy=spec.truncation, half_width=half_width).value
    if k is KernelKind.MINUS:
        return (_left(z, w, spec, half_width) + _left(z + 1, w + 1, spec, half_width)
                - _left(z + 1, w, spec, half_width) - _left(z, w + 1, spec, half_width))
    # FULL
    return _left(z, w, spec, half_width) + _left(z + 1, w + 1, spec, half_width)


def minus_direct(z, w, T, policy: TruncationPolicy = DEFAULT_POLICY):
    """Minus kernel as the alternating unit-shift double series."""
    return lattice_sum(z, w, T, 1, alternating=True, policy=policy).value


def plus_four_term(z, w, T, policy: TruncationPolicy = DEFAULT_POLICY):
    """Plus kernel as the four shifted Left evaluations."""
    spec = KernelSpec(KernelKind.LEFT, T, policy)
    return (_left(z, w, spec) + _left(z + 1, w + 1, spec)
            + _left(z + 1, w, spec) + _left(z, w + 1, spec))


def kernel_matrix(spec: KernelSpec, zs, ws):
    """Cross matrix ``[K(z_i, w_j)]``."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    ws = np.atleast_1d(np.asarray(ws, dtype=complex))
    return np.asarray(eval_kernel(spec, zs[:, None], ws[None, :]))


@dataclass(frozen=True)
class GramMatrix:
    points: np.ndarray
    entries: np.ndarray
    spec: KernelSpec

    @property
    def size(self) -> int:
        return len(self.points)


def gram(spec: KernelSpec, points) -> GramMatrix:
    """Hermitian Gram matrix ``G[i, j] = K(z_i, z_j)`` over distinct admissible points."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex)).copy()
    if pts.ndim != 1 or len(pts) == 0:
        raise DomainError("gram needs a non-empty 1-D list of points")
    if len(np.unique(pts)) != len(pts):
        raise DomainError("gram points must be pairwise distinct")
    ok = np.atleast_1d(contains(spec.domain, pts, ADMISSIBLE_MARGIN))
    if not ok.all():
        i = int(np.flatnonzero(~ok)[0])
        raise DomainError(f"gram: point {i} ({pts[i]}) is not admissible for {spec.kind.value}")
    iu, ju = np.triu_indices(len(pts))
    try:
        upper = np.asarray(eval_kernel(spec, pts[iu], pts[ju], check=False))
    except PoleProximity as exc:
        raise PoleProximity(f"gram ({spec.kind.value}): {exc}") from exc
    G = np.zeros((len(pts), len(pts)), dtype=complex)
    G[iu, ju] = upper
    G[ju, iu] = np.conj(upper)
    G[np.diag_indices_from(G)] = G.diagonal().real
    G.setflags(write=False)
    pts.setflags(write=False)
    return GramMatrix(pts, G, spec)


@dataclass(frozen=True)
class PSDReport:
    min_eigenvalue: float
    trace: float
    passes: bool


def psd_check(g, rel_tol: float = 1e-10) -> PSDReport:
    """Positive semidefiniteness up to ``-rel_tol * trace``."""
    G = g.entries if isinstance(g, GramMatrix) else np.asarray(g)
    lam = float(np.linalg.eigvalsh(G)[0])
    tr = float(np.trace(G).real)
    return PSDReport(lam, tr, lam >= -rel_tol * tr)
