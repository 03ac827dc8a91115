import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cgacdts.algebra import (
    BLADE_NAMES,
    BLADES,
    EI,
    E0,
    GRADES,
    Multivector,
    basis,
    commutator,
    gp,
    ip,
    op,
    rev,
)
from oracles import NULL_BLADES, cayley_tables

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
mv32 = arrays(np.float64, 32, elements=finite)
vec5 = arrays(np.float64, 5, elements=finite)
VECTOR_SLOTS = np.array([BLADE_NAMES.index(n) for n in ("e0", "e1", "e2", "e3", "ei")])


def as_vector(v5):
    out = np.zeros(32)
    out[VECTOR_SLOTS] = v5
    return out


@pytest.fixture(scope="module")
def tables():
    return cayley_tables()


def test_blade_ordering_is_grade_then_lexicographic():
    assert tuple(BLADES) == tuple(NULL_BLADES)
    assert BLADE_NAMES[:6] == ("1", "e0", "e1", "e2", "e3", "ei")
    assert BLADE_NAMES[-1] == "e0123i"
    assert list(GRADES) == sorted(GRADES)


@pytest.mark.parametrize("index", range(3))
def test_product_tables_match_diagonal_basis_oracle(tables, index):
    eye = np.eye(32)
    product = (gp, op, ip)[index]
    assert np.array_equal(product(eye[:, None, :], eye[None, :, :]), tables[index])


def test_metric_of_null_basis():
    assert gp(E0, E0)[0] == 0.0
    assert gp(EI, EI)[0] == 0.0
    assert ip(E0, EI)[0] == -1.0
    e1 = basis("e1")
    assert np.array_equal(gp(e1, e1), basis("1"))
    assert np.array_equal(gp(e1, basis("e2")), basis("e12"))


def test_outer_product_examples():
    e1 = Multivector.blade("e1")
    assert (e1 ^ e1).norm() == 0.0


def test_commutator_example_from_table(tables):
    a, b = basis("e12"), basis("e13")
    g = tables[0]
    i12, i13 = BLADE_NAMES.index("e12"), BLADE_NAMES.index("e13")
    expected = 0.5 * (g[i12, i13] - g[i13, i12])
    assert np.array_equal(commutator(a, b), expected)


def test_reverse_signs():
    x = Multivector.scalar(1.0) + Multivector.blade("e12")
    assert (~x).isclose(Multivector.scalar(1.0) - Multivector.blade("e12"))
    assert (~Multivector.blade("e123i"))["e123i"] == 1.0
    assert (~Multivector.blade("e123"))["e123"] == -1.0


@settings(max_examples=200, deadline=None)
@given(mv32, mv32, mv32)
def test_associativity(a, b, c):
    scale = max(np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c), 1e-300)
    assert np.linalg.norm(gp(gp(a, b), c) - gp(a, gp(b, c))) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(vec5, vec5)
def test_vector_product_splits_into_inner_and_outer(a5, b5):
    a, b = as_vector(a5), as_vector(b5)
    scale = max(np.linalg.norm(a) * np.linalg.norm(b), 1.0)
    assert np.max(np.abs(gp(a, b) - ip(a, b) - op(a, b))) <= 1e-14 * scale


@settings(max_examples=100, deadline=None)
@given(vec5)
def test_vector_self_wedge_vanishes(a5):
    a = as_vector(a5)
    assert np.array_equal(op(a, a), np.zeros(32))


@settings(max_examples=100, deadline=None)
@given(mv32, mv32)
def test_commutator_antisymmetric_and_reverse_involution(a, b):
    assert np.allclose(commutator(a, b), -commutator(b, a), rtol=0, atol=1e-12 * (1 + np.abs(a).sum() * np.abs(b).sum()))
    assert np.array_equal(rev(rev(a)), a)
    assert np.array_equal(commutator(a, a), np.zeros(32))


@settings(max_examples=100, deadline=None)
@given(mv32, mv32)
def test_reverse_is_anti_automorphism(a, b):
    scale = max(np.linalg.norm(a) * np.linalg.norm(b), 1.0)
    assert np.linalg.norm(rev(gp(a, b)) - gp(rev(b), rev(a))) <= 1e-12 * scale


def test_products_broadcast_over_leading_axes():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 1, 32))
    b = rng.normal(size=(1, 5, 32))
    out = gp(a, b)
    assert out.shape == (4, 5, 32)
    assert np.allclose(out[2, 3], gp(a[2, 0], b[0, 3]), atol=1e-13)


def test_multivector_wrapper():
    x = Multivector.blade("e1", 2.0)
    assert x["e1"] == 2.0
    assert (x * x).isclose(Multivector.scalar(4.0))
    assert (2 * x) == Multivector.blade("e1", 4.0)
    assert x.grades() == {1}
    assert (x + 1).grade(0).isclose(Multivector.scalar(1.0))
    with pytest.raises(KeyError):
        Multivector.blade("e5")
    with pytest.raises(ValueError):
        Multivector(np.zeros(31))
    with pytest.raises(ValueError):
        x.coeffs[0] = 1.0
