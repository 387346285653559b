import random
from fractions import Fraction

import pytest

from rsparam.algebra import LinComb, tensor
from rsparam.renorm import (Character, CharacterError, PreparationMap, Renormalization,
                            character_candidates, degree_preserving_suite, delta_plus_audit,
                            delta_r, identity_preparation, is_degree_preserving, make_R_ell,
                            preparation_suite, random_character, validate_preparation)
from rsparam.trees import PlusTree, Tree, parse_tree

CHERRY = parse_tree("Xi I_(0)[Xi]")
CHAIN = parse_tree("Xi I_(0)[Xi I_(0)[Xi]]")


def lc(*pairs):
    out = LinComb()
    for c, text in pairs:
        out._acc(parse_tree(text), Fraction(c))
    return out


@pytest.fixture
def ell():
    return Character({CHERRY: Fraction(1, 2), CHAIN: 3})


@pytest.fixture
def ren(pam, ell):
    spec = pam.spec
    return Renormalization(make_R_ell(ell, spec.alpha, spec.beta), spec.hopf())


def test_character_candidates(pam):
    assert character_candidates(pam) == [CHERRY, CHAIN]


def test_root_extraction_oracle(pam):
    spec = pam.spec
    out = delta_r(CHERRY, spec.alpha, spec.beta)
    assert out == (LinComb.of((Tree.one(), CHERRY))
                   + LinComb.of((CHERRY, parse_tree("o[2,1,0]"))))


def test_R_ell_oracles(ren):
    R = ren.R
    assert R(CHERRY) == lc((1, "Xi I_(0)[Xi]"), ("1/2", "o[2,1,0]"))
    assert R(CHAIN) == lc((1, str(CHAIN)), ("1/2", "o[2,1,0] I_(0)[Xi]"), (3, "o[3,2,0]"))
    assert R(Tree.xi()) == LinComb.of(Tree.xi())
    assert R(CHERRY.planted((0,))) == LinComb.of(CHERRY.planted((0,)))


def test_M_R_renormalises_inside_kernels(ren):
    assert ren.M(CHAIN) == lc((1, str(CHAIN)), ("1/2", "Xi I_(0)[o[2,1,0]]"),
                              ("1/2", "o[2,1,0] I_(0)[Xi]"), (3, "o[3,2,0]"))
    assert ren.M(Tree.monomial((2,))) == LinComb.of(Tree.monomial((2,)))


def test_no_ext_variant_changes_degree(pam, ell):
    spec = pam.spec
    R = make_R_ell(ell, spec.alpha, spec.beta, with_ext=False)
    assert R(CHERRY) == lc((1, "Xi I_(0)[Xi]"), ("1/2", "1"))
    assert not is_degree_preserving(R, pam)
    assert is_degree_preserving(make_R_ell(ell, spec.alpha, spec.beta), pam)


def test_delta_R_is_M_tensor_one_when_degree_preserving(pam, ren):
    one = LinComb.of(PlusTree.one())
    for t in pam.trees:
        assert ren.delta(t) == tensor(ren.M(t), one)


def test_identity_preparation(pam):
    ren = Renormalization(identity_preparation(), pam.spec.hopf())
    for t in pam.trees:
        assert ren.M(t) == LinComb.of(t)
        assert ren.delta(t) == LinComb.of((t, PlusTree.one()))
    for p in pam.plus_trees:
        assert ren.M_plus(p) == LinComb.of(p)


def test_character_validation(pam):
    with pytest.raises(CharacterError):
        Character({CHERRY: 0.5})
    with pytest.raises(CharacterError):
        Character({parse_tree("X Xi I_(0)[Xi]"): 1}).validate(pam)
    with pytest.raises(CharacterError):
        Character({parse_tree("Xi I_(0)[Xi I_(0)[Xi I_(0)[Xi I_(0)[Xi I_(0)[Xi]]]]]"): 1}).validate(pam)
    Character({CHERRY: 2}).validate(pam)


def test_character_json_round_trip(ell):
    obj = ell.to_json_obj()
    assert {(item["tree"], item["value"]) for item in obj} == {
        ("Xi I_(0)[Xi]", "1/2"), ("Xi I_(0)[Xi I_(0)[Xi]]", "3")}
    assert Character.from_json_obj(obj).values == ell.values


def test_random_character_is_seeded(pam):
    a = random_character(pam, random.Random(7))
    b = random_character(pam, random.Random(7))
    assert a.values == b.values and len(a) >= 1


def test_validate_preparation_rejects_bad_maps(pam):
    def bad(t):
        out = LinComb.of(t)
        if t == CHERRY:
            out._acc(Tree.xi(), Fraction(1))  # lowers the degree
        return out

    report = validate_preparation(PreparationMap(bad, False, "bad"), pam)
    assert not report["ok"]
    assert {"tree": CHERRY.key, "condition": "triangular", "term": "Xi"} in report["failures"]


@pytest.mark.parametrize("name", ["kpz", "pam", "phi4"])
def test_preparation_suite_random_characters(bases, name):
    basis = bases[name]
    spec = basis.spec
    rng = random.Random(11)
    for _ in range(2):
        ell = random_character(basis, rng)
        for with_ext in (True, False):
            R = make_R_ell(ell, spec.alpha, spec.beta, with_ext=with_ext)
            report = preparation_suite(basis, R, check_neumann=False)
            assert report["ok"], report
            assert delta_plus_audit(basis, R)["ok"]


@pytest.mark.parametrize("name", ["kpz", "pam", "phi4"])
def test_degree_preserving_identities(bases, name):
    basis = bases[name]
    spec = basis.spec
    ell = random_character(basis, random.Random(3))
    assert degree_preserving_suite(basis, make_R_ell(ell, spec.alpha, spec.beta))["ok"]
    report = degree_preserving_suite(basis, make_R_ell(ell, spec.alpha, spec.beta, with_ext=False))
    assert not report["ok"]
    assert report["simple_delta_R"]["failures"] or report["cointeraction"]["failures"]
