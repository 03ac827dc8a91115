"""Independent reference implementations used as test oracles.

Nothing here imports the package's product tables or kinematics; each oracle
recomputes its quantity from first principles by a different route.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

# -- Cayley tables via the diagonal basis ---------------------------------------

# orthogonal generators (e1, e2, e3, e+, e-)
_SQUARES = (1.0, 1.0, 1.0, 1.0, -1.0)
# null generators (e0, e1, e2, e3, ei) expanded over the orthogonal ones
_NULL_GENERATORS = (
    {(4,): 0.5, (3,): -0.5},  # e0 = (e- - e+)/2
    {(0,): 1.0},
    {(1,): 1.0},
    {(2,): 1.0},
    {(4,): 1.0, (3,): 1.0},  # ei = e- + e+
)


def _blade_product(a: tuple, b: tuple) -> tuple[float, tuple]:
    """Product of two orthogonal basis blades by bubble sort and contraction."""
    items = list(a) + list(b)
    sign = 1.0
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if items[j] > items[j + 1]:
                items[j], items[j + 1] = items[j + 1], items[j]
                sign = -sign
    out = []
    for g in items:
        if out and out[-1] == g:
            out.pop()
            sign *= _SQUARES[g]
        else:
            out.append(g)
    return sign, tuple(out)


def _mul(x: dict, y: dict, outer: bool = False) -> dict:
    out: dict = {}
    for a, ca in x.items():
        for b, cb in y.items():
            if outer and set(a) & set(b):
                continue
            s, blade = _blade_product(a, b)
            out[blade] = out.get(blade, 0.0) + s * ca * cb
    return {k: v for k, v in out.items() if v != 0.0}


NULL_BLADES = tuple(c for k in range(6) for c in combinations(range(5), k))
_ORTHO_BLADES = NULL_BLADES  # same index tuples, different generators
_ORTHO_INDEX = {b: i for i, b in enumerate(_ORTHO_BLADES)}


def _null_blade_expansion(blade: tuple) -> dict:
    out = {(): 1.0}
    for g in blade:
        out = _mul(out, _NULL_GENERATORS[g], outer=True)
    return out


def _to_vector(x: dict) -> np.ndarray:
    v = np.zeros(32)
    for blade, c in x.items():
        v[_ORTHO_INDEX[blade]] += c
    return v


def cayley_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Geometric, outer and inner (fat-dot) product tables in the null basis.

    ``table[i, j, k]`` is the coefficient of null blade ``k`` in blade_i * blade_j.
    """
    expansions = [_null_blade_expansion(b) for b in NULL_BLADES]
    change = np.column_stack([_to_vector(e) for e in expansions])  # null -> orthogonal
    back = np.linalg.inv(change)
    grades = np.array([len(b) for b in NULL_BLADES])
    gp = np.zeros((32, 32, 32))
    op = np.zeros((32, 32, 32))
    for i, ei in enumerate(expansions):
        for j, ej in enumerate(expansions):
            gp[i, j] = back @ _to_vector(_mul(ei, ej))
            op[i, j] = back @ _to_vector(_mul(ei, ej, outer=True))
    gp[np.abs(gp) < 1e-15] = 0.0
    op[np.abs(op) < 1e-15] = 0.0
    ip = gp * (grades[None, None, :] == np.abs(grades[:, None, None] - grades[None, :, None]))
    return gp, op, ip


# -- Franka homogeneous-transform chain -----------------------------------------

FRANKA_DH = (  # a, d, alpha (modified DH, joint angle adds to theta)
    (0.0, 0.333, 0.0),
    (0.0, 0.0, -np.pi / 2),
    (0.0, 0.316, np.pi / 2),
    (0.0825, 0.0, np.pi / 2),
    (-0.0825, 0.384, -np.pi / 2),
    (0.0, 0.0, np.pi / 2),
    (0.088, 0.0, np.pi / 2),
)
FRANKA_FLANGE = 0.107
FRANKA_TCP = 0.1034


def _rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1.0]])


def _rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1.0]])


def _trans(x, y, z):
    t = np.eye(4)
    t[:3, 3] = (x, y, z)
    return t


def franka_transform(q, base=None) -> np.ndarray:
    """4x4 end-effector (hand TCP) pose of the Franka from its modified-DH table."""
    t = np.eye(4) if base is None else np.array(base, dtype=float)
    for (a, d, alpha), qi in zip(FRANKA_DH, q):
        t = t @ _rot_x(alpha) @ _trans(a, 0, 0) @ _rot_z(qi) @ _trans(0, 0, d)
    return t @ _trans(0, 0, FRANKA_FLANGE) @ _rot_z(-np.pi / 4) @ _trans(0, 0, FRANKA_TCP)


# -- finite-horizon discrete LQR ------------------------------------------------


def riccati_tracking(a, b, q, r, qf, x0, x_ref, horizon):
    """States and controls of the LQ problem with cost about a fixed point ``x_ref``.

    Cost ``sum_k (x_k - x_ref)' Q (x_k - x_ref) + u_k' R u_k + (x_N - x_ref)' Qf (x_N - x_ref)``
    with ``A x_ref = x_ref``, solved by the backward Riccati recursion.
    """
    p = qf
    gains = []
    for _ in range(horizon):
        k = np.linalg.solve(r + b.T @ p @ b, b.T @ p @ a)
        p = q + a.T @ p @ (a - b @ k)
        gains.append(k)
    gains.reverse()
    xs = [np.asarray(x0, dtype=float)]
    us = []
    for k in gains:
        u = -k @ (xs[-1] - x_ref)
        us.append(u)
        xs.append(a @ xs[-1] + b @ u)
    return np.array(xs), np.array(us)
