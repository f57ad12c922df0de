"""Planar domains used by the reachable-space kernels.

All regions are open sets. Points are plain Python/numpy complex numbers
``x + iy`` measured in rod units. Every predicate is vectorised over numpy
arrays of points.

    square-d      D    = {|y| < x, |y| < 2 - x}
    square-q      Q    = {|y| < x, |y| < 1 - x}
    sector        Delta = {|arg z| < pi/4}
    half-plane    C+   = {Re z > 0}
    periodized-d  union of 2n + D
    periodized-q  union of n + Q
    shifted-d     -1 + D
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import DomainError

SQRT2 = math.sqrt(2.0)


class RegionKind(str, enum.Enum):
    SQUARE_D = "square-d"
    SQUARE_Q = "square-q"
    SECTOR = "sector"
    HALF_PLANE = "half-plane"
    PERIODIZED_D = "periodized-d"
    PERIODIZED_Q = "periodized-q"
    SHIFTED_D = "shifted-d"


# Bounding boxes (x0, x1, y0, y1) used for rejection sampling. The sector and
# half-plane are unbounded; they are sampled inside a fixed window.
_BOXES = {
    RegionKind.SQUARE_D: (0.0, 2.0, -1.0, 1.0),
    RegionKind.SQUARE_Q: (0.0, 1.0, -0.5, 0.5),
    RegionKind.SECTOR: (0.0, 2.0, -2.0, 2.0),
    RegionKind.HALF_PLANE: (0.0, 2.0, -2.0, 2.0),
    RegionKind.PERIODIZED_D: (0.0, 2.0, -1.0, 1.0),
    RegionKind.PERIODIZED_Q: (0.0, 1.0, -0.5, 0.5),
    RegionKind.SHIFTED_D: (-1.0, 1.0, -1.0, 1.0),
}

# Radius of the largest inscribed disc; margins at or above it empty the set.
_INRADIUS = {
    RegionKind.SQUARE_D: SQRT2 / 2,
    RegionKind.SQUARE_Q: SQRT2 / 4,
    RegionKind.PERIODIZED_D: SQRT2 / 2,
    RegionKind.PERIODIZED_Q: SQRT2 / 4,
    RegionKind.SHIFTED_D: SQRT2 / 2,
}


def region_kind(kind) -> RegionKind:
    try:
        return RegionKind(kind)
    except ValueError:
        names = ", ".join(k.value for k in RegionKind)
        raise DomainError(f"unknown region {kind!r}; expected one of {names}") from None


def _as_points(p) -> np.ndarray:
    z = np.asarray(p, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("points must have finite real and imaginary parts")
    return z


def _square(z, width, margin):
    # Diamond with vertices 0 and `width` on the real axis. Each edge has
    # normal (1, +-1)/sqrt(2), so a Euclidean shrink m offsets by m*sqrt(2).
    x, ay = z.real, np.abs(z.imag)
    off = margin * SQRT2
    return (x - ay > off) & (width - x - ay > off)


def cell_representative(z, period: float) -> np.ndarray:
    """Translate points by multiples of `period` so that 0 <= Re < period."""
    z = _as_points(z)
    return z - period * np.floor(z.real / period)


def contains(kind, p, margin: float = 0.0):
    """Open-set membership of `p` in `kind` shrunk by Euclidean `margin`.

    Returns a bool for scalar input and a boolean array otherwise.
    """
    if margin < 0:
        raise DomainError("margin must be non-negative")
    kind = region_kind(kind)
    z = _as_points(p)
    if kind is RegionKind.SQUARE_D:
        out = _square(z, 2.0, margin)
    elif kind is RegionKind.SQUARE_Q:
        out = _square(z, 1.0, margin)
    elif kind is RegionKind.SECTOR:
        # the shrunk quarter-plane cone is the cone translated along +x
        out = z.real - np.abs(z.imag) > margin * SQRT2
    elif kind is RegionKind.HALF_PLANE:
        out = z.real > margin
    elif kind is RegionKind.PERIODIZED_D:
        out = _square(cell_representative(z, 2.0), 2.0, margin)
    elif kind is RegionKind.PERIODIZED_Q:
        out = _square(cell_representative(z, 1.0), 1.0, margin)
    else:  # SHIFTED_D
        out = _square(z + 1.0, 2.0, margin)
    return bool(out) if out.ndim == 0 else out


def sample_points(kind, count: int, margin: float, seed: int,
                  max_draws: int = 1_000_000) -> np.ndarray:
    """Draw `count` distinct points uniformly from `kind` shrunk by `margin`.

    Rejection sampling over the region's bounding box (a fixed window for
    the unbounded sector and half-plane). Deterministic for a given seed.
    """
    kind = region_kind(kind)
    if count < 1:
        raise DomainError("count must be at least 1")
    if margin < 0:
        raise DomainError("margin must be non-negative")
    if kind in _INRADIUS and margin >= _INRADIUS[kind]:
        raise DomainError(
            f"{kind.value} shrunk by {margin} is empty "
            f"(inradius {_INRADIUS[kind]:.6f})")
    x0, x1, y0, y1 = _BOXES[kind]
    rng = np.random.default_rng(seed)
    out: list[complex] = []
    seen = set()
    drawn = 0
    while len(out) < count:
        if drawn >= max_draws:
            raise DomainError(
                f"rejection sampling of {kind.value} exceeded {max_draws} draws")
        batch = max(64, 4 * (count - len(out)))
        z = rng.uniform(x0, x1, batch) + 1j * rng.uniform(y0, y1, batch)
        drawn += batch
        for p in z[contains(kind, z, margin)]:
            if p not in seen:
                seen.add(p)
                out.append(complex(p))
                if len(out) == count:
                    break
    return np.array(out)
