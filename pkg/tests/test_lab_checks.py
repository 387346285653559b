import random

import numpy as np
import pytest

from rsparam import make_R_ell
from rsparam.lab.checks import (LabConfig, Residual, SlopeFit, build_models, dumps_report,
                                fit_exponent, ghat_scaling, lab_report, planted_pairs,
                                recursive_pi_defect, scaling_targets)
from rsparam.renorm import random_character
from rsparam.trees import Tree, parse_tree


def test_fit_exponent_oracle():
    js = [3, 4, 5, 6, 7, 8]
    assert fit_exponent([2.0 ** (-0.7 * j) for j in js], js) == pytest.approx(0.7)
    assert fit_exponent([5 * 2.0 ** (1.4 * j) for j in js], js) == pytest.approx(-1.4)
    with pytest.raises(ValueError):
        fit_exponent([1.0, 2.0], [3, 4])


def test_slope_fit_bounds():
    assert SlopeFit("t", -0.4, -0.3).ok
    assert not SlopeFit("t", -0.4, 0.3).ok
    assert SlopeFit("t", -0.4, 2.0, one_sided=True).ok
    assert not SlopeFit("t", -0.4, -0.9, one_sided=True).ok
    assert not SlopeFit("t", -0.4, float("nan")).ok


def test_residual_tracks_worst_case():
    r = Residual("x", 1e-8)
    assert not r.ok  # nothing checked
    r.add(0.0, "a")
    r.add(1e-9, "b")
    r.add(1e-10, "c")
    assert r.ok and r.value == 1e-9 and r.witness == "b"
    r.add(float("nan"), "d")
    assert not r.ok and r.witness == "d"


def test_planted_pairs_of_pam(pam):
    pairs = planted_pairs(pam)
    assert ((0,), Tree.xi()) in pairs
    assert len(pairs) == len(set(pairs))


def test_scaling_targets(pam):
    sharp, other = scaling_targets(pam.spec, pam)
    assert [str(t) for t in sharp] == ["Xi", "I_(0)[Xi]"]
    assert parse_tree("X Xi") in other


def test_ghat_of_monomial_scales_linearly(pam):
    spec = pam.spec
    R = make_R_ell(random_character(pam, random.Random(1)), spec.alpha, spec.beta)
    grid, _lp, _m, rm = build_models(spec, R, 11, 3)
    (fit,) = ghat_scaling(rm, Tree.monomial((1,)), grid.core_indices[10], range(3, 9))
    assert fit.exponent == pytest.approx(1.0, abs=1e-10)


def test_recursive_identity_on_planted_trees(pam):
    spec = pam.spec
    R = make_R_ell(random_character(pam, random.Random(2)), spec.alpha, spec.beta)
    grid, _lp, _m, rm = build_models(spec, R, 10, 4)
    i, k = grid.sample_points(2)
    for a, t in planted_pairs(pam):
        assert recursive_pi_defect(rm, a, t, i, k) <= 1e-7


def test_report_is_deterministic(pam):
    spec = pam.spec
    R = make_R_ell(random_character(pam, random.Random(4)), spec.alpha, spec.beta)
    cfg = LabConfig(J=10, seed=7)
    a = dumps_report(lab_report(spec, pam, R, cfg, scaling=False))
    b = dumps_report(lab_report(spec, pam, R, cfg, scaling=False))
    assert a == b
    assert '"pass": true' in a
