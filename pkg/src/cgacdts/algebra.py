"""Conformal geometric algebra of 3D space, dense 32-coefficient storage.

Generators are ordered ``(e0, e1, e2, e3, ei)`` where ``e0`` is the origin and
``ei`` the point at infinity.  Blades are ordered by grade and then
lexicographically by generator index, so e.g. the grade-2 block reads
``e01 e02 e03 e0i e12 e13 e1i e23 e2i e3i``.

All low-level functions take numpy arrays whose last axis has length 32 and
broadcast over leading axes.  :class:`Multivector` is a small immutable
wrapper with operator overloading for interactive use.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

NUM_BLADES = 32
GENERATOR_NAMES = ("0", "1", "2", "3", "i")

BLADES: tuple[tuple[int, ...], ...] = tuple(
    combo for k in range(6) for combo in combinations(range(5), k)
)
BLADE_NAMES: tuple[str, ...] = tuple(
    "1" if not b else "e" + "".join(GENERATOR_NAMES[g] for g in b) for b in BLADES
)
BLADE_INDEX: dict[str, int] = {name: i for i, name in enumerate(BLADE_NAMES)}
GRADES = np.array([len(b) for b in BLADES])

# (-1)^(k(k-1)/2) per blade
REVERSE_SIGNS = np.where((GRADES * (GRADES - 1) // 2) % 2 == 0, 1.0, -1.0)


def _orthogonal_tables() -> tuple[np.ndarray, np.ndarray]:
    """Product and outer-product tables in the diagonal basis (e1, e2, e3, e+, e-)."""
    squares = (1.0, 1.0, 1.0, 1.0, -1.0)
    n = 1 << 5
    gp = np.zeros((n, n, n))
    op = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            # count swaps needed to bring a's generators past b's
            swaps = 0
            x = a >> 1
            while x:
                swaps += bin(x & b).count("1")
                x >>= 1
            sign = -1.0 if swaps % 2 else 1.0
            common = a & b
            for g in range(5):
                if common & (1 << g):
                    sign *= squares[g]
            gp[a, b, a ^ b] = sign
            if not common:
                op[a, b, a ^ b] = sign
    return gp, op


def _build_null_basis_table() -> np.ndarray:
    """Geometric product tensor ``T[i, j, k]`` in the null basis.

    Blades of the null basis are expanded in the diagonal basis using
    ``e0 = (e- - e+)/2`` and ``ei = e- + e+``, multiplied there, and mapped back.
    """
    gp_o, op_o = _orthogonal_tables()
    # generator g of the null basis as a diagonal-basis vector (bitmask coords)
    e1, e2, e3, ep, em = (1 << k for k in range(5))
    gen = np.zeros((5, 32))
    gen[0, em], gen[0, ep] = 0.5, -0.5
    gen[1, e1] = gen[2, e2] = gen[3, e3] = 1.0
    gen[4, em], gen[4, ep] = 1.0, 1.0

    change = np.zeros((32, 32))  # column i: blade i in diagonal coords
    for i, blade in enumerate(BLADES):
        acc = np.zeros(32)
        acc[0] = 1.0
        for g in blade:
            acc = np.einsum("i,j,ijk->k", acc, gen[g], op_o)
        change[:, i] = acc
    inv = np.linalg.inv(change)

    table = np.einsum("ai,bj,abc,kc->ijk", change, change, gp_o, inv, optimize=True)
    return np.round(table * 4.0) / 4.0  # strip round-off; entries are exact quarters


GP_TABLE = _build_null_basis_table()
_gi = GRADES[:, None, None]
_gj = GRADES[None, :, None]
_gk = GRADES[None, None, :]
OP_TABLE = np.where(_gk == _gi + _gj, GP_TABLE, 0.0)
IP_TABLE = np.where(_gk == np.abs(_gi - _gj), GP_TABLE, 0.0)
del _gi, _gj, _gk

_GP_FLAT = GP_TABLE.reshape(NUM_BLADES * NUM_BLADES, NUM_BLADES)
_OP_FLAT = OP_TABLE.reshape(NUM_BLADES * NUM_BLADES, NUM_BLADES)
_IP_FLAT = IP_TABLE.reshape(NUM_BLADES * NUM_BLADES, NUM_BLADES)
for _t in (GP_TABLE, OP_TABLE, IP_TABLE):
    _t.setflags(write=False)


def _sparse(table: np.ndarray):
    """Nonzero entries of a product table in row-compressed form over the left blade."""
    i, j, k = np.nonzero(table)
    ptr = np.searchsorted(i, np.arange(NUM_BLADES + 1))
    return ptr.astype(np.int64), j.astype(np.int64), k.astype(np.int64), table[i, j, k].copy()


_GP_SPARSE = _sparse(GP_TABLE)
_OP_SPARSE = _sparse(OP_TABLE)
_IP_SPARSE = _sparse(IP_TABLE)

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

if numba is not None:

    @numba.njit(cache=True)
    def _kernel(a, b, ptr, idx_b, idx_out, coef):
        # rows of a or b may be 1 (broadcast)
        n = max(a.shape[0], b.shape[0])
        sa = 1 if a.shape[0] > 1 else 0
        sb = 1 if b.shape[0] > 1 else 0
        out = np.zeros((n, 32))
        for r in range(n):
            ra = r * sa
            rb = r * sb
            for i in range(32):
                ai = a[ra, i]
                if ai == 0.0:
                    continue
                for t in range(ptr[i], ptr[i + 1]):
                    out[r, idx_out[t]] += coef[t] * ai * b[rb, idx_b[t]]
        return out


def _bilinear_dense(flat: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    outer = a[..., :, None] * b[..., None, :]
    return outer.reshape(outer.shape[:-2] + (NUM_BLADES * NUM_BLADES,)) @ flat


def _bilinear(flat: np.ndarray, sparse, a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if numba is None:
        return _bilinear_dense(flat, a, b)
    if a.ndim == 1 and b.ndim == 1:
        return _kernel(np.ascontiguousarray(a)[None], np.ascontiguousarray(b)[None], *sparse)[0]
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    a2 = a.reshape(-1, NUM_BLADES) if a.ndim <= 2 else None
    b2 = b.reshape(-1, NUM_BLADES) if b.ndim <= 2 else None
    if a2 is None or b2 is None or (len(a2) != len(b2) and 1 not in (len(a2), len(b2))):
        a2 = np.broadcast_to(a, shape + (NUM_BLADES,)).reshape(-1, NUM_BLADES)
        b2 = np.broadcast_to(b, shape + (NUM_BLADES,)).reshape(-1, NUM_BLADES)
    out = _kernel(np.ascontiguousarray(a2), np.ascontiguousarray(b2), *sparse)
    return out.reshape(shape + (NUM_BLADES,))


def gp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geometric product of coefficient arrays."""
    return _bilinear(_GP_FLAT, _GP_SPARSE, a, b)


def op(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Outer (wedge) product of coefficient arrays."""
    return _bilinear(_OP_FLAT, _OP_SPARSE, a, b)


def ip(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Inner product: grade ``|r - s|`` part of the product of grade r and s blades."""
    return _bilinear(_IP_FLAT, _IP_SPARSE, a, b)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Commutator product ``(ab - ba) / 2``."""
    return 0.5 * (gp(a, b) - gp(b, a))


def rev(a: np.ndarray) -> np.ndarray:
    """Reverse of coefficient arrays."""
    return np.asarray(a, dtype=float) * REVERSE_SIGNS


def grade_part(a: np.ndarray, k: int) -> np.ndarray:
    return np.where(GRADES == k, a, 0.0)


def sandwich_raw(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``m x ~m`` without any unit check."""
    return gp(gp(m, x), rev(m))


def basis(name: str) -> np.ndarray:
    out = np.zeros(NUM_BLADES)
    out[BLADE_INDEX[name]] = 1.0
    return out


def blade_mask(*grades: int) -> np.ndarray:
    """Boolean mask selecting all blades of the given grades."""
    return np.isin(GRADES, grades)


E0 = basis("e0")
EI = basis("ei")
E1, E2, E3 = basis("e1"), basis("e2"), basis("e3")
SCALAR = basis("1")
for _v in (E0, EI, E1, E2, E3, SCALAR):
    _v.setflags(write=False)
VECTOR_IDX = np.array([BLADE_INDEX[n] for n in ("e1", "e2", "e3")])


class Multivector:
    """Immutable element of the conformal algebra.

    ``*`` is the geometric product, ``^`` the outer product, ``|`` the inner
    product and ``~`` the reverse.  Scalars mix in with ``*`` and ``+``.
    """

    __slots__ = ("_c",)
    __array_priority__ = 100

    def __init__(self, coeffs=None):
        c = np.zeros(NUM_BLADES) if coeffs is None else np.array(coeffs, dtype=float)
        if c.shape != (NUM_BLADES,):
            raise ValueError(f"expected {NUM_BLADES} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def blade(cls, name: str, value: float = 1.0) -> "Multivector":
        if name not in BLADE_INDEX:
            raise KeyError(f"unknown blade {name!r}; known: {', '.join(BLADE_NAMES)}")
        return cls(value * basis(name))

    @classmethod
    def scalar(cls, value: float) -> "Multivector":
        return cls(value * SCALAR)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def __getitem__(self, name: str) -> float:
        return float(self._c[BLADE_INDEX[name]])

    def grade(self, k: int) -> "Multivector":
        return Multivector(grade_part(self._c, k))

    def grades(self) -> set[int]:
        return {int(g) for g in GRADES[np.abs(self._c) > 0]}

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        return float(np.linalg.norm(self._c))

    def _coerce(self, other):
        if isinstance(other, Multivector):
            return other._c
        if np.isscalar(other):
            return float(other) * SCALAR
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Multivector(self._c + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Multivector(self._c - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Multivector(o - self._c)

    def __neg__(self):
        return Multivector(-self._c)

    def __mul__(self, other):
        if np.isscalar(other):
            return Multivector(self._c * float(other))
        if isinstance(other, Multivector):
            return Multivector(gp(self._c, other._c))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self._c * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Multivector(self._c / float(other))
        return NotImplemented

    def __xor__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Multivector(op(self._c, o))

    def __or__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Multivector(ip(self._c, o))

    def __invert__(self):
        return Multivector(rev(self._c))

    def commutator(self, other: "Multivector") -> "Multivector":
        return Multivector(commutator(self._c, other._c))

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def isclose(self, other: "Multivector", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._c, other._c, rtol=0.0, atol=atol))

    def __repr__(self):
        terms = [
            f"{v:+.6g}{'' if n == '1' else '*' + n}"
            for n, v in zip(BLADE_NAMES, self._c)
            if v != 0.0
        ]
        return "Multivector(" + (" ".join(terms) if terms else "0") + ")"


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    return a * b


def outer_product(a: Multivector, b: Multivector) -> Multivector:
    return a ^ b


def inner_product(a: Multivector, b: Multivector) -> Multivector:
    return a | b


def commutator_product(a: Multivector, b: Multivector) -> Multivector:
    return a.commutator(b)


def reverse(x: Multivector) -> Multivector:
    return ~x
