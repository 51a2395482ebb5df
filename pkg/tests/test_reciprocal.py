import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paraxial_bands import KPoint, SquareLattice, build_gbasis, standard_kpath

LAT = SquareLattice(5.0, 0.5)


def test_default_basis_size():
    b = build_gbasis(LAT, 2)
    assert b.count == 25 == len(b)
    assert np.abs(b.vectors).max() == pytest.approx(4 * math.pi / 5)


def test_m1():
    b = build_gbasis(LAT, 1)
    assert b.count == 9
    assert tuple(b.indices[0]) == (0, 0)


@pytest.mark.parametrize("M", [0, -1, 1.5])
def test_rejects_bad_half_width(M):
    with pytest.raises(ValueError):
        build_gbasis(LAT, M)


@given(st.integers(1, 6))
def test_inversion_closed(M):
    b = build_gbasis(LAT, M)
    perm = b.inversion_permutation()
    assert np.array_equal(b.indices[perm], -b.indices)
    assert sorted(perm.tolist()) == list(range(b.count))


def test_deterministic_and_zero_first():
    a, b = build_gbasis(LAT, 3), build_gbasis(5.0, 3)
    assert np.array_equal(a.indices, b.indices)
    assert tuple(a.indices[0]) == (0, 0)
    rest = [tuple(r) for r in a.indices[1:]]
    assert rest == sorted(rest)  # row-major by (m, l)


def test_basis_read_only():
    b = build_gbasis(LAT, 2)
    with pytest.raises(ValueError):
        b.vectors[0, 0] = 1.0


def test_position():
    b = build_gbasis(LAT, 2)
    i = b.position(1, -2)
    assert tuple(b.indices[i]) == (1, -2)


def test_path_corners():
    p = standard_kpath(LAT, 20)
    z, t = p[p.index_of("Z")], p[p.index_of("T")]
    assert (z.kx, z.ky) == pytest.approx((0.6283185307, 0.0))
    assert (t.kx, t.ky) == pytest.approx((0.6283185307, 0.6283185307))
    assert p[0].label == "Delta" and p[0].path_coordinate == 0.0
    assert p[-1].label == "Delta"
    assert p.coordinates[-1] == pytest.approx(math.pi / 5 * (2 + math.sqrt(2)), rel=1e-14)


def test_path_count_and_monotone():
    p = standard_kpath(LAT, 20)
    assert len(p) == 3 * 19 + 1
    assert np.all(np.diff(p.coordinates) > 0)
    assert len(p.segments) == 3
    for (a, _, _), (_, b, _) in zip(p.segments[1:], p.segments[:-1]):
        assert a.same_k(b)


@settings(max_examples=20)
@given(st.integers(2, 40))
def test_doubling_preserves_labels(s):
    a, b = standard_kpath(LAT, s), standard_kpath(LAT, 2 * s)
    la = [(p.label, p.path_coordinate) for _, p in a.labeled()]
    lb = [(p.label, p.path_coordinate) for _, p in b.labeled()]
    assert la == lb


@settings(max_examples=20)
@given(st.integers(2, 40))
def test_first_zone(s):
    for p in standard_kpath(LAT, s):
        assert abs(p.kx) <= math.pi / 5 + 1e-15 and abs(p.ky) <= math.pi / 5 + 1e-15


def test_rejects_one_sample():
    with pytest.raises(ValueError):
        standard_kpath(LAT, 1)


def test_kpoint_same_k():
    assert KPoint(0.1, 0.2).same_k(KPoint(0.1, 0.2 + 1e-14))
    assert not KPoint(0.1, 0.2).same_k(KPoint(0.1, 0.3))
