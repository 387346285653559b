"""Hypothesis strategies shared by the tests."""
from hypothesis import strategies as st

from rsparam.trees import Tree


def _trees(depth: int):
    leaf = st.builds(lambda k, xi: (Tree.monomial((k,)) * Tree.xi()) if xi else Tree.monomial((k,)),
                     st.integers(0, 2), st.booleans())
    if depth == 0:
        return leaf
    sub = _trees(depth - 1)
    planted = st.builds(lambda t, a: t.planted((a,)), sub, st.integers(0, 1))
    return st.builds(lambda base, kids: _product(base, kids), leaf, st.lists(planted, max_size=2))


def _product(base, kids):
    out = base
    for k in kids:
        out = out * k
    return out


trees_strategy = _trees(2)
