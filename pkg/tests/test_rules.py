import dataclasses
from fractions import Fraction

import pytest

from rsparam.rules import (Basis, EquationSpec, NodeShape, SpecError, basis_from_trees,
                           closure_check, generate_basis, load_spec, shipped_spec,
                           subcriticality_check)
from rsparam.trees import parse_tree


def names(basis):
    return sorted(str(t) for t in basis.trees)


@pytest.mark.parametrize("name", ["kpz", "pam", "phi4"])
def test_shipped_bases_are_sized_and_closed(bases, name):
    basis = bases[name]
    assert 20 <= len(basis.trees) <= 200
    ok, escapes = closure_check(basis)
    assert ok, escapes
    spec = basis.spec
    assert all(spec.deg(t) <= spec.degree_cutoff for t in basis.trees)
    assert all(t.noises <= spec.noise_cutoff for t in basis.trees)
    degs = [spec.deg(t) for t in basis.trees]
    assert degs == sorted(degs)


def test_pam_negative_trees(pam):
    assert [str(t) for t in pam.negative_trees()] == [
        "Xi", "Xi I_(0)[Xi]", "X^(1) Xi", "Xi I_(0)[Xi I_(0)[Xi]]"]


def test_kpz_negative_trees(bases):
    assert [str(t) for t in bases["kpz"].negative_trees()] == [
        "Xi", "I_(1)[Xi] I_(1)[Xi]", "I_(1)[Xi]", "X^(1) Xi",
        "I_(1)[I_(1)[Xi] I_(1)[Xi]] I_(1)[Xi]"]


def test_noise_cutoff_one():
    spec = dataclasses.replace(shipped_spec("pam"), noise_cutoff=1,
                               rules=(NodeShape(1, ((0,),), False),))
    assert names(generate_basis(spec)) == sorted(["1", "X^(1)", "Xi", "I_(0)[Xi]"])


def test_noise_cutoff_one_with_polynomial_decorations():
    spec = dataclasses.replace(shipped_spec("pam"), noise_cutoff=1)
    assert names(generate_basis(spec)) == sorted(
        ["1", "X^(1)", "Xi", "X^(1) Xi", "X^(2) Xi", "I_(0)[Xi]"])


def test_empty_rules_give_polynomials():
    spec = dataclasses.replace(shipped_spec("pam"), rules=(), degree_cutoff=Fraction(5, 2))
    basis = generate_basis(spec)
    assert names(basis) == ["1", "X^(1)", "X^(2)"]
    assert subcriticality_check(basis)["dimensions"] == {"0": 1, "1": 1, "2": 1}


def test_closure_counterexample():
    spec = shipped_spec("pam")
    t = parse_tree("Xi I_(0)[Xi]")
    hopf = spec.hopf()
    plus = sorted({p for (_s, p), _c in hopf.coaction(t).items()}, key=lambda p: p.key)
    broken = Basis(spec, [t], plus)
    ok, escapes = closure_check(broken)
    assert not ok
    assert ("Xi I_(0)[Xi]", "Xi") in escapes
    assert closure_check(basis_from_trees(spec, [t, parse_tree("Xi")]))[0]


def test_rules_conformance():
    spec = shipped_spec("pam")
    assert spec.conforms(parse_tree("Xi I_(0)[Xi I_(0)[Xi]]"))
    assert not spec.conforms(parse_tree("Xi Xi"))
    assert not spec.conforms(parse_tree("I_(1)[Xi]"))
    assert NodeShape(1, ((0,), (0,))).admits(1, {(0,): 1}, True)


def test_spec_validation(tmp_path):
    base = shipped_spec("pam").to_dict()
    with pytest.raises(SpecError):
        EquationSpec.from_dict({**base, "alpha": "1/2"})
    with pytest.raises(SpecError):
        EquationSpec.from_dict({**base, "rules": [{"noise": 1, "kernels": [[2]]}]})
    path = tmp_path / "s.json"
    import json
    path.write_text(json.dumps(base))
    assert load_spec(path) == shipped_spec("pam")


def test_subcriticality_report(bases):
    diag = subcriticality_check(bases["phi4"])
    assert diag["finite"] and diag["size"] == len(bases["phi4"].trees)
    assert sum(diag["noise_profile"].values()) == diag["size"]
