from fractions import Fraction

import pytest

from rsparam.algebra import LinComb
from rsparam.hopf import HopfStructure
from rsparam.trees import PlusTree, Tree, parse_basis, parse_plus, parse_tree

PAM = HopfStructure(Fraction(-7, 5), Fraction(2))
KPZ = HopfStructure(Fraction(-149, 100), Fraction(2))


def lin(*pairs):
    out = LinComb()
    for coef, text in pairs:
        out._acc(parse_basis(text), Fraction(coef))
    return out


def fix(u):
    """Coerce the right tensor factor to plus trees."""
    out = LinComb()
    for (s, p), c in u.items():
        if isinstance(p, Tree):
            p = PlusTree(p.poly, ()) if p.is_polynomial() else p
        out._acc((s, p), c)
    return out


def test_coaction_of_noise_and_monomial():
    assert PAM.coaction(Tree.xi()) == LinComb.of((Tree.xi(), PlusTree.one()))
    x = Tree.monomial((1,))
    expected = LinComb.of((x, PlusTree.one())) + LinComb.of((Tree.one(), PlusTree.monomial((1,))))
    assert PAM.coaction(x) == expected


def test_coaction_of_planted_noise():
    # deg I(Xi) = 3/5 in (0, 1): a single recentring term
    t = parse_tree("I_(0)[Xi]")
    expected = (LinComb.of((t, PlusTree.one()))
                + LinComb.of((Tree.one(), parse_plus("I+_(0)[Xi]"))))
    assert PAM.coaction(t) == expected


def test_coaction_of_pam_cherry():
    t = parse_tree("Xi I_(0)[Xi]")
    expected = (LinComb.of((t, PlusTree.one()))
                + LinComb.of((Tree.xi(), parse_plus("I+_(0)[Xi]"))))
    assert PAM.coaction(t) == expected


def test_coaction_with_first_order_shift():
    # deg I(Xi I(Xi)) = 6/5, so I+_(0) and X ⊗ I+_(1) both appear
    t = parse_tree("I_(0)[Xi I_(0)[Xi]]")
    out = PAM.coaction(t)
    assert out.coefficient((Tree.monomial((1,)), parse_plus("I+_(1)[Xi I_(0)[Xi]]"))) == 1
    assert out.coefficient((Tree.one(), parse_plus("I+_(0)[Xi I_(0)[Xi]]"))) == 1


def test_negative_planted_has_no_plus_part():
    t = parse_tree("I_(1)[Xi]")  # degree -49/100 for KPZ
    assert KPZ.coaction(t) == LinComb.of((t, PlusTree.one()))
    assert KPZ.plus_planted((1,), Tree.xi()) == LinComb()


def test_antipode_oracles():
    x = PlusTree.monomial((1,))
    assert PAM.antipode(x) == LinComb.of(x, -1)
    assert PAM.antipode(PlusTree.monomial((2,))) == LinComb.of(PlusTree.monomial((2,)))
    p = parse_plus("I+_(0)[Xi]")
    assert PAM.antipode(p) == LinComb.of(p, -1)
    # from Delta+ q = q⊗1 + 1⊗q - I+_1[..]⊗X + I+_0[Xi]⊗I+_0[Xi]
    q = parse_plus("I+_(0)[Xi I_(0)[Xi]]")
    expected = (LinComb.of(q, -1) + LinComb.of(parse_plus("X I+_(1)[Xi I_(0)[Xi]]"), -1)
                + LinComb.of(parse_plus("I+_(0)[Xi] I+_(0)[Xi]")))
    assert PAM.antipode(q) == expected


def test_coproduct_plus_of_monomial():
    x = PlusTree.monomial((1,))
    one = PlusTree.one()
    assert PAM.coproduct_plus(x) == LinComb.of((x, one)) + LinComb.of((one, x))


@pytest.mark.parametrize("name", ["kpz", "pam", "phi4"])
def test_identities_on_basis(bases, name):
    basis = bases[name]
    hopf = basis.spec.hopf()
    for p in basis.plus_trees:
        assert not hopf.coassociativity_defect(p)
        left, right = hopf.antipode_defects(p)
        assert not left and not right
    for t in basis.trees:
        assert not hopf.comodule_defect(t)


def test_theta_inverse_routes_agree(pam):
    hopf = pam.spec.hopf()
    for t in pam.trees[:10]:
        for p in pam.plus_trees[:10]:
            u = LinComb.of((t, p))
            inv = hopf.theta_inverse_closed(u)
            assert inv == hopf.theta_inverse_neumann(u)
            assert hopf.theta(inv) == u
