"""Conformal points and the round/flat primitives built from them."""

from __future__ import annotations

import numpy as np

from .algebra import BLADE_INDEX, E0, EI, NUM_BLADES, VECTOR_IDX, Multivector, ip, op


class PointAtInfinityError(ValueError):
    """Extraction attempted on a vector with vanishing ``ei`` weight."""


def embed_raw(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (NUM_BLADES,))
    out[..., BLADE_INDEX["e0"]] = 1.0
    out[..., VECTOR_IDX] = x
    out[..., BLADE_INDEX["ei"]] = 0.5 * np.sum(x * x, axis=-1)
    return out


def extract_raw(p: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    # -(ei . P) is the e0 coefficient
    weight = p[..., BLADE_INDEX["e0"]]
    if np.any(np.abs(weight) <= tol):
        raise PointAtInfinityError("point has zero weight (ei . P = 0)")
    return p[..., VECTOR_IDX] / np.asarray(weight)[..., None]


def embed_point(x) -> Multivector:
    """Conformal point ``e0 + x + |x|^2/2 ei`` of a Euclidean position in meters."""
    return Multivector(embed_raw(x))


def extract_point(p: Multivector) -> np.ndarray:
    """Euclidean position of a (possibly scaled) conformal point.

    Raises:
        PointAtInfinityError: if ``ei . P`` vanishes.
    """
    return extract_raw(p.coeffs)


def point_pair(x1, x2) -> Multivector:
    return embed_point(x1) ^ embed_point(x2)


def circle(x1, x2, x3) -> Multivector:
    """Circle through three points (grade 3)."""
    return embed_point(x1) ^ embed_point(x2) ^ embed_point(x3)


def sphere(x1, x2, x3, x4) -> Multivector:
    return embed_point(x1) ^ embed_point(x2) ^ embed_point(x3) ^ embed_point(x4)


def plane(x1, x2, x3) -> Multivector:
    """Plane through three points as the grade-4 blade ``P1^P2^P3^ei``."""
    return embed_point(x1) ^ embed_point(x2) ^ embed_point(x3) ^ Multivector(EI)


def line(point, direction, normalize: bool = True) -> Multivector:
    """Line ``P ^ d ^ ei`` through ``point`` along ``direction``.

    With ``normalize`` the direction is scaled to unit length so that the
    ``e0 d ei`` part of the blade has unit magnitude.
    """
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if n == 0.0:
        raise ValueError("line direction has zero length")
    if normalize:
        d = d / n
    dv = np.zeros(NUM_BLADES)
    dv[VECTOR_IDX] = d
    return Multivector(op(op(embed_raw(point), dv), EI))


# e0 ^ e_k ^ ei carries the direction, e_j ^ e_k ^ ei the moment p x d
_DIR_IDX = np.array([BLADE_INDEX[n] for n in ("e01i", "e02i", "e03i")])
_MOM_IDX = np.array([BLADE_INDEX[n] for n in ("e23i", "e13i", "e12i")])
_MOM_SIGN = np.array([1.0, -1.0, 1.0])


def line_direction_moment(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean direction ``d`` and moment ``p x d`` of a line blade."""
    c = np.asarray(coeffs, dtype=float)
    return c[..., _DIR_IDX].copy(), c[..., _MOM_IDX] * _MOM_SIGN


def normalize_line(coeffs: np.ndarray) -> np.ndarray:
    d, _ = line_direction_moment(coeffs)
    n = np.linalg.norm(d)
    if n == 0.0:
        raise ValueError("line has no direction part")
    return np.asarray(coeffs, dtype=float) / n


def circle_from_points(x1, x2, x3) -> tuple[np.ndarray, float, np.ndarray]:
    """Euclidean center, radius and unit normal of the circle through three points.

    Raises:
        ValueError: if the points are collinear.
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (x1, x2, x3))
    ab, ac = b - a, c - a
    n = np.cross(ab, ac)
    nn = float(n @ n)
    if nn < 1e-18:
        raise ValueError("circle points are collinear")
    center = a + (np.cross(n, ab) * (ac @ ac) + np.cross(ac, n) * (ab @ ab)) / (2.0 * nn)
    return center, float(np.linalg.norm(a - center)), n / np.sqrt(nn)


def distance_to_circle(x, center, radius: float, normal) -> float:
    """Euclidean distance from ``x`` to a circle given by center/radius/normal."""
    r = np.asarray(x, dtype=float) - center
    h = float(r @ normal)
    radial = float(np.linalg.norm(r - h * normal))
    return float(np.hypot(h, radial - radius))


def inner_distance_sq(x1, x2) -> float:
    """``-2 P1 . P2`` which equals the squared Euclidean distance."""
    return float(-2.0 * ip(embed_raw(x1), embed_raw(x2))[0])
