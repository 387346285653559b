import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsparam.algebra import LinComb, counit, m_plus, tensor
from rsparam.trees import PlusTree, Tree, parse_plus, parse_tree

XI = Tree.xi()
X = Tree.monomial((1,))

coefs = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def test_zero_coefficients_are_dropped():
    u = LinComb.of(XI, 2) + LinComb.of(XI, -2)
    assert not u and len(u) == 0


def test_exact_arithmetic():
    u = LinComb.of(XI, Fraction(1, 3)) + LinComb.of(X, 2)
    v = 3 * u
    assert v.coefficient(XI) == 1 and v.coefficient(X) == 6
    assert (u - u) == LinComb()


def test_floats_rejected():
    with pytest.raises((TypeError, ValueError)):
        LinComb.of(XI, 0.5)


def test_tensor_and_counit():
    one = Tree.one()
    u = tensor(LinComb.of(one, 2) + LinComb.of(XI), LinComb.of(PlusTree.one(), 3))
    assert u.coefficient((one, PlusTree.one())) == 6
    assert counit(u) == 6


def test_m_plus_multiplies_factors():
    p = parse_plus("I+_(0)[Xi]")
    u = LinComb.of((p, PlusTree.monomial((1,))), 2)
    assert m_plus(u) == LinComb.of(parse_plus("X I+_(0)[Xi]"), 2)


def test_json_round_trip():
    u = LinComb.of((parse_tree("Xi I_(0)[Xi]"), parse_plus("I+_(0)[Xi]")), Fraction(-3, 4))
    obj = json.loads(u.to_json())
    assert obj == {"terms": [{"coef": "-3/4", "basis": "Xi I_(0)[Xi] ⊗ I+_(0)[Xi]"}]}
    assert LinComb.from_json_obj(obj, kinds=("T", "P")) == u


@settings(max_examples=60, deadline=None)
@given(coefs, coefs, coefs)
def test_vector_space_laws(a, b, c):
    u = LinComb.of(XI, a) + LinComb.of(X, b)
    v = LinComb.of(X, c)
    assert u + v == v + u
    assert (u + v) - v == u
    assert (a * u).coefficient(XI) == a * a
