import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatrkhs.errors import DomainError
from heatrkhs.geometry import RegionKind, cell_representative, contains, sample_points

finite = st.floats(-3.0, 3.0, allow_nan=False)
margins = st.floats(0.0, 0.6, allow_nan=False)


@pytest.mark.parametrize("kind, p, expected", [
    ("square-d", 1 + 0j, True),
    ("square-d", 0j, False),
    ("square-d", 2 + 0j, False),
    ("square-q", 0.5 + 0j, True),
    ("square-q", 0.5 + 0.5j, False),
    ("sector", 1 + 0.999j, True),
    ("sector", 1 + 1j, False),
    ("sector", -1 + 0j, False),
    ("half-plane", 1e-9 + 5j, True),
    ("half-plane", 0j, False),
    ("shifted-d", 0j, True),
    ("shifted-d", 1 + 0j, False),
    ("periodized-d", 5 + 0.2j, True),
    ("periodized-d", 4 + 0j, False),
    ("periodized-q", -2.5 + 0.1j, True),
])
def test_membership_examples(kind, p, expected):
    assert contains(kind, p) is expected


def test_margin_is_euclidean_distance():
    # distance from 1 + 0.5i to the edge y = x - ... of D is (1 - 0.5)/sqrt(2)
    d = 0.5 / math.sqrt(2)
    assert contains("square-d", 1 + 0.5j, d - 1e-9)
    assert not contains("square-d", 1 + 0.5j, d + 1e-9)
    assert contains("half-plane", 0.3 + 7j, 0.29)
    assert not contains("half-plane", 0.3 + 7j, 0.31)


def test_vectorised():
    out = contains("square-q", np.array([0.5, 0.9 + 0.2j, 2.0]))
    assert out.tolist() == [True, False, False]


def test_rejects_bad_input():
    with pytest.raises(DomainError):
        contains("square-d", 1.0, margin=-0.1)
    with pytest.raises(DomainError):
        contains("triangle", 1.0)
    with pytest.raises(DomainError):
        contains("square-d", complex(np.nan, 0))


@given(finite, finite, margins, margins)
def test_monotone_in_margin(x, y, m1, m2):
    lo, hi = sorted((m1, m2))
    for kind in RegionKind:
        if contains(kind, complex(x, y), hi):
            assert contains(kind, complex(x, y), lo)


@given(finite, finite)
def test_periodized_matches_cell_representative(x, y):
    z = complex(x, y)
    assert contains("periodized-d", z) == contains("square-d", cell_representative(z, 2.0))
    assert contains("periodized-q", z) == contains("square-q", cell_representative(z, 1.0))


@given(st.integers(-200, 200), st.integers(-64, 64), st.integers(-3, 3))
def test_periodized_translation_invariant(i, j, k):
    # dyadic coordinates so that the translate is exact in floating point
    z = complex(i / 64, j / 64)
    assert contains("periodized-d", z) == contains("periodized-d", z + 2 * k)
    assert contains("periodized-q", z) == contains("periodized-q", z + k)


def test_d_disjoint_from_rotations():
    pts = sample_points("square-d", 500, 0.0, 3)
    assert not np.any(contains("square-d", 1j * pts))
    assert not np.any(contains("square-d", -1j * pts))


def test_sample_points_postconditions():
    pts = sample_points("square-q", 5, 0.05, 42)
    assert len(pts) == 5 and len(set(pts.tolist())) == 5
    assert np.all(np.abs(pts.imag) < pts.real - 0.05 * math.sqrt(2))
    assert np.all(np.abs(pts.imag) < 1 - pts.real - 0.05 * math.sqrt(2))


@settings(max_examples=25)
@given(st.sampled_from(list(RegionKind)), st.integers(1, 40), st.integers(0, 2**31))
def test_sampling_is_seeded_and_admissible(kind, count, seed):
    a = sample_points(kind, count, 0.05, seed)
    b = sample_points(kind, count, 0.05, seed)
    np.testing.assert_array_equal(a, b)
    assert np.all(contains(kind, a, 0.05))


def test_empty_shrunk_region():
    with pytest.raises(DomainError, match="empty"):
        sample_points("square-d", 1, 0.9, 1)
    with pytest.raises(DomainError):
        sample_points("square-q", 0, 0.0, 1)


def test_rejection_cap():
    # inradius of Q is sqrt(2)/4 ~ 0.3536; just below it the set is a speck
    with pytest.raises(DomainError, match="exceeded"):
        sample_points("square-q", 3, 0.3535, 0, max_draws=2000)
