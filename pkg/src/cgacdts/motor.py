"""Motors: exponential and logarithmic maps and their Jacobians.

A motor is stored compactly as 8 coefficients on the blades
``(1, e12, e13, e23, e1i, e2i, e3i, e123i)`` and a bivector (motor logarithm)
as 6 coefficients on ``(e12, e13, e23, e1i, e2i, e3i)``.

Writing a bivector as ``B = b + u ei`` with ``b`` the Euclidean rotation part
(magnitude ``phi``) and ``u`` a Euclidean vector, the exponential has the
closed form::

    exp(B) = cos(phi) + s b + (s u + c2 (u.w) w) ei + s (u.w) e123i

with ``w`` the axis vector dual to ``b``, ``s = sin(phi)/phi`` and
``c2 = (cos(phi) - s)/phi^2``.  A joint rotating by ``q`` about a unit axis
blade ``L`` uses ``exp(-q/2 L)``; a translation by ``t`` is ``exp(-t ei / 2)``.
"""

from __future__ import annotations

import numpy as np

from .algebra import (
    BLADE_INDEX,
    E0,
    E1,
    E2,
    E3,
    NUM_BLADES,
    VECTOR_IDX,
    Multivector,
    gp,
    rev,
    sandwich_raw,
)
from .geometry import extract_raw

MOTOR_BLADES = ("1", "e12", "e13", "e23", "e1i", "e2i", "e3i", "e123i")
BIVECTOR_BLADES = ("e12", "e13", "e23", "e1i", "e2i", "e3i")
MOTOR_IDX = np.array([BLADE_INDEX[n] for n in MOTOR_BLADES])
BIVECTOR_IDX = np.array([BLADE_INDEX[n] for n in BIVECTOR_BLADES])

# maps rotation coefficients (b12, b13, b23) to the axis vector (w1, w2, w3);
# symmetric and an involution
AXIS_MAP = np.array([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]])

IDENTITY8 = np.array([1.0, 0, 0, 0, 0, 0, 0, 0])

_SERIES_PHI = 0.05
BRANCH_TOL = 1e-9
UNIT_TOL = 1e-6


class BranchError(ValueError):
    """Logarithm requested where the rotation branch is ambiguous."""


class InvalidMotorError(ValueError):
    """A transform that is required to be a unit motor is not."""


def _sinc_terms(phi: float) -> tuple[float, float, float, float]:
    """Return ``cos(phi)``, ``s``, ``c2`` and ``c3 = (dc2/dphi)/phi``."""
    if phi < _SERIES_PHI:
        p2 = phi * phi
        s = 1 - p2 / 6 + p2**2 / 120 - p2**3 / 5040 + p2**4 / 362880
        c2 = -1 / 3 + p2 / 30 - p2**2 / 840 + p2**3 / 45360 - p2**4 / 3991680
        c3 = 1 / 15 - p2 / 210 + p2**2 / 7560 - p2**3 / 498960 + p2**4 / 51891840
        return np.cos(phi), s, c2, c3
    c = np.cos(phi)
    s = np.sin(phi) / phi
    c2 = (c - s) / (phi * phi)
    c3 = -(s + 3 * c2) / (phi * phi)
    return c, s, c2, c3


def exp_bivector(b6: np.ndarray) -> np.ndarray:
    """Exponential of a compact bivector, returned as a compact motor."""
    b6 = np.asarray(b6, dtype=float)
    b, u = b6[:3], b6[3:]
    w = AXIS_MAP @ b
    phi = float(np.linalg.norm(b))
    c, s, c2, _ = _sinc_terms(phi)
    uw = float(u @ w)
    out = np.empty(8)
    out[0] = c
    out[1:4] = s * b
    out[4:7] = s * u + c2 * uw * w
    out[7] = s * uw
    return out


def exp_jacobian(b6: np.ndarray) -> np.ndarray:
    """8x6 derivative of :func:`exp_bivector` with respect to its argument."""
    b6 = np.asarray(b6, dtype=float)
    b, u = b6[:3], b6[3:]
    w = AXIS_MAP @ b
    pu = AXIS_MAP @ u
    phi = float(np.linalg.norm(b))
    _, s, c2, c3 = _sinc_terms(phi)
    uw = float(u @ w)
    jac = np.zeros((8, 6))
    jac[0, :3] = -s * b
    jac[1:4, :3] = s * np.eye(3) + c2 * np.outer(b, b)
    jac[4:7, :3] = (
        c2 * np.outer(u, b)
        + np.outer(w, uw * c3 * b + c2 * pu)
        + c2 * uw * AXIS_MAP
    )
    jac[4:7, 3:] = s * np.eye(3) + c2 * np.outer(w, w)
    jac[7, :3] = uw * c2 * b + s * pu
    jac[7, 3:] = s * w
    return jac


def _log_parts(m8: np.ndarray):
    m0 = float(m8[0])
    mb = m8[1:4]
    n = float(np.linalg.norm(mb))
    phi = float(np.arctan2(n, m0))
    if phi > np.pi - BRANCH_TOL:
        raise BranchError(
            f"motor rotation part is within {BRANCH_TOL:g} of the branch cut "
            f"(scalar part {m0:.6g}); logarithm is ambiguous"
        )
    r2 = n * n + m0 * m0
    x = n / m0 if m0 > 0 else np.inf
    if x < 1e-2:
        # k = atan(n/m0)/n and (dk/dn)/n, expanded for small n
        x2 = x * x
        k = (1 - x2 / 3 + x2**2 / 5 - x2**3 / 7 + x2**4 / 9) / m0
        dk_n = (-2 / 3 + 4 * x2 / 5 - 6 * x2**2 / 7 + 8 * x2**3 / 9) / m0**3
    else:
        k = phi / n
        dk_n = (m0 * n / r2 - phi) / n**3
    return m0, mb, n, phi, r2, k, dk_n


def log_motor(m8: np.ndarray) -> np.ndarray:
    """Logarithm of a compact motor, returned as a compact bivector.

    The rotation magnitude of the result lies in ``[0, pi)``, so
    ``exp_bivector(log_motor(m))`` reproduces ``m`` itself rather than ``-m``.

    Raises:
        BranchError: if the rotation magnitude is within ``BRANCH_TOL`` of pi.
    """
    m8 = np.asarray(m8, dtype=float)
    _, mb, _, phi, _, k, _ = _log_parts(m8)
    _, _, c2, _ = _sinc_terms(phi)
    w = k * (AXIS_MAP @ mb)
    out = np.empty(6)
    out[:3] = k * mb
    out[3:] = k * m8[4:7] - k * k * c2 * m8[7] * w
    return out


def log_jacobian(m8: np.ndarray) -> np.ndarray:
    """6x8 derivative of :func:`log_motor` with respect to the motor coefficients."""
    m8 = np.asarray(m8, dtype=float)
    m0, mb, n, phi, r2, k, dk_n = _log_parts(m8)
    v, mi = m8[4:7], float(m8[7])
    _, _, c2, c3 = _sinc_terms(phi)
    pmb = AXIS_MAP @ mb

    # gradients over (m0, mb) packed as 4-vectors
    dphi = np.empty(4)
    dk = np.empty(4)
    dphi[0] = -n / r2
    dk[0] = -1.0 / r2
    if n > 0:
        dphi[1:] = (m0 / r2) * mb / n
    else:
        dphi[1:] = 0.0
    dk[1:] = dk_n * mb
    dc2 = phi * c3 * dphi

    jac = np.zeros((6, 8))
    jac[:3, :4] = np.outer(mb, dk)
    jac[:3, 1:4] += k * np.eye(3)

    # u = k v - k^3 c2 mi P mb
    jac[3:, :4] = np.outer(v, dk) - mi * np.outer(pmb, 3 * k * k * c2 * dk + k**3 * dc2)
    jac[3:, 1:4] -= k**3 * c2 * mi * AXIS_MAP
    jac[3:, 4:7] = k * np.eye(3)
    jac[3:, 7] = -(k**3) * c2 * pmb
    return jac


def to_compact(m: np.ndarray) -> np.ndarray:
    """32-coefficient motor array(s) to compact 8-vectors."""
    return np.asarray(m)[..., MOTOR_IDX]


def from_compact(m8: np.ndarray) -> np.ndarray:
    m8 = np.asarray(m8, dtype=float)
    out = np.zeros(m8.shape[:-1] + (NUM_BLADES,))
    out[..., MOTOR_IDX] = m8
    return out


def bivector_to_full(b6: np.ndarray) -> np.ndarray:
    b6 = np.asarray(b6, dtype=float)
    out = np.zeros(b6.shape[:-1] + (NUM_BLADES,))
    out[..., BIVECTOR_IDX] = b6
    return out


def bivector_from_full(b: np.ndarray) -> np.ndarray:
    return np.asarray(b)[..., BIVECTOR_IDX]


def unit_error(m: np.ndarray) -> float:
    """Coefficient norm of ``m ~m - 1``."""
    d = gp(m, rev(m))
    d[0] -= 1.0
    return float(np.linalg.norm(d))


def motor_exp(b: Multivector) -> Multivector:
    """Motor ``exp(B)`` of a bivector given as a multivector."""
    return Multivector(from_compact(exp_bivector(bivector_from_full(b.coeffs))))


def motor_log(m: Multivector) -> Multivector:
    """Principal logarithm of a motor; see :func:`log_motor`."""
    return Multivector(bivector_to_full(log_motor(to_compact(m.coeffs))))


def sandwich(m: Multivector, x: Multivector) -> Multivector:
    """Apply the unit motor ``m`` to ``x`` as ``m x ~m``.

    Raises:
        InvalidMotorError: if ``m ~m`` deviates from 1 by more than ``UNIT_TOL``.
    """
    err = unit_error(m.coeffs)
    if err > UNIT_TOL:
        raise InvalidMotorError(f"not a unit motor: |M~M - 1| = {err:.3g}")
    return Multivector(gp(gp(m.coeffs, x.coeffs), rev(m.coeffs)))


def translator(t) -> np.ndarray:
    """Compact motor translating by the Euclidean vector ``t``."""
    out = IDENTITY8.copy()
    out[4:7] = -0.5 * np.asarray(t, dtype=float)
    return out


def rotor_from_quaternion(quat) -> np.ndarray:
    """Compact rotor for a unit quaternion given as ``(w, x, y, z)``."""
    w, x, y, z = np.asarray(quat, dtype=float)
    norm = np.sqrt(w * w + x * x + y * y + z * z)
    if not np.isfinite(norm) or abs(norm - 1.0) > UNIT_TOL:
        raise InvalidMotorError(f"quaternion norm {norm:.6g} is not 1")
    w, x, y, z = w / norm, x / norm, y / norm, z / norm
    return np.array([w, -z, y, -x, 0.0, 0.0, 0.0, 0.0])


def rotor(axis, angle: float) -> np.ndarray:
    """Compact rotor turning by ``angle`` (right hand) about a unit axis through the origin."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    return rotor_from_quaternion([np.cos(half), *(np.sin(half) * axis)])


def motor_from_pose(translation, quat) -> np.ndarray:
    """Compact motor ``T R``: rotate by ``quat`` then translate by ``translation``."""
    return to_compact(gp(from_compact(translator(translation)), from_compact(rotor_from_quaternion(quat))))


def motor_translation(m: np.ndarray) -> np.ndarray:
    """Euclidean image of the origin under a 32-coefficient motor."""
    return extract_raw(sandwich_raw(m, E0))


def motor_rotation_matrix(m: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix of a 32-coefficient motor (columns: images of e1, e2, e3)."""
    r = np.array(m, dtype=float)
    r[BLADE_INDEX["e1i"]] = r[BLADE_INDEX["e2i"]] = r[BLADE_INDEX["e3i"]] = 0.0
    r[BLADE_INDEX["e123i"]] = 0.0
    cols = [gp(gp(r, e), rev(r))[VECTOR_IDX] for e in (E1, E2, E3)]
    return np.column_stack(cols)
