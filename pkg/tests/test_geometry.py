import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cgacdts.algebra import E0, EI, Multivector, commutator, ip, op
from cgacdts.geometry import (
    PointAtInfinityError,
    circle,
    circle_from_points,
    distance_to_circle,
    embed_point,
    embed_raw,
    extract_point,
    inner_distance_sq,
    line,
    line_direction_moment,
    plane,
)

point3 = arrays(np.float64, 3, elements=st.floats(-5, 5, allow_nan=False))


def test_embedding_examples():
    assert embed_point([0, 0, 0]) == Multivector(E0)
    p = embed_point([1, 2, 3])
    expected = Multivector(E0) + Multivector.blade("e1") + 2 * Multivector.blade("e2")
    expected = expected + 3 * Multivector.blade("e3") + 7 * Multivector(EI)
    assert p.isclose(expected, atol=0.0)


def test_extraction_examples():
    assert np.array_equal(extract_point(Multivector(E0)), np.zeros(3))
    assert np.allclose(extract_point(2 * embed_point([1, 1, 1])), [1, 1, 1], atol=1e-15)
    x = np.array([0.3, -0.2, 0.5])
    assert np.allclose(extract_point(embed_point(x)), x, atol=1e-14)
    with pytest.raises(PointAtInfinityError):
        extract_point(Multivector(EI))


@settings(max_examples=100, deadline=None)
@given(point3)
def test_points_are_null_with_unit_weight(x):
    p = embed_raw(x)
    assert abs(ip(p, p)[0]) <= 1e-12 * (1 + x @ x) ** 2
    assert ip(EI, p)[0] == -1.0


@settings(max_examples=200, deadline=None)
@given(point3, point3)
def test_distance_identity(a, b):
    d2 = float((a - b) @ (a - b))
    assert abs(inner_distance_sq(a, b) - d2) <= 1e-12 * max(1.0, d2, a @ a, b @ b)


def test_pointpair_of_origin_and_e1_is_grade2():
    pp = embed_point([0, 0, 0]) ^ embed_point([1, 0, 0])
    # e0 ^ (e0 + e1 + ei/2) = e01 + e0i/2
    assert pp.isclose(Multivector.blade("e01") + 0.5 * Multivector.blade("e0i"), atol=0.0)
    assert (embed_point([1, 2, 3]) ^ embed_point([1, 2, 3])).norm() == 0.0


def test_circle_contains_its_points_and_rejects_others():
    pts = [np.array(p, dtype=float) for p in ([1, 0, 0], [0, 1, 0], [-1, 0, 0])]
    c = circle(*pts).coeffs
    pp = op(embed_raw(pts[0]), embed_raw(pts[2]))
    assert np.allclose(commutator(c, pp), 0.0, atol=1e-14)
    off = op(embed_raw(pts[0]), embed_raw([0, 0, 1]))
    assert np.linalg.norm(commutator(c, off)) > 0.1


def test_circle_from_points_oracle():
    center, radius, normal = circle_from_points([1, 0, 2], [0, 1, 2], [-1, 0, 2])
    assert np.allclose(center, [0, 0, 2], atol=1e-15)
    assert radius == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(np.abs(normal), [0, 0, 1])
    assert distance_to_circle([0, 0, 2], center, radius, normal) == pytest.approx(1.0)
    assert distance_to_circle([0, -1, 2], center, radius, normal) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        circle_from_points([0, 0, 0], [1, 1, 1], [2, 2, 2])


def test_plane_incidence():
    pl = plane([0, 0, 0.3], [1, 0, 0.3], [0, 1, 0.3]).coeffs
    assert np.allclose(op(pl, embed_raw([0.7, -2.0, 0.3])), 0.0, atol=1e-14)
    assert np.linalg.norm(op(pl, embed_raw([0.7, -2.0, 0.4]))) > 1e-3


def test_line_direction_and_moment():
    p, d = np.array([0.2, -0.1, 0.5]), np.array([0.0, 2.0, 0.0])
    dd, mm = line_direction_moment(line(p, d).coeffs)
    assert np.allclose(dd, [0, 1, 0], atol=1e-15)
    assert np.allclose(mm, np.cross(p, [0, 1, 0]), atol=1e-15)
    # the x-axis line through the origin is e0 ^ (e0 + e1 + ei/2) ^ ei
    xaxis = (embed_point([0, 0, 0]) ^ embed_point([1, 0, 0]) ^ Multivector(EI)).coeffs
    assert np.allclose(line([0, 0, 0], [1, 0, 0]).coeffs, xaxis, atol=0.0)
    with pytest.raises(ValueError):
        line([0, 0, 0], [0, 0, 0])
