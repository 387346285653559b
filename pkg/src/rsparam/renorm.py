"""Preparation maps and the renormalisation maps built from them.

A preparation map R acts on trees; from it we build

* M_R^x  multiplicative, M_R^x(I_a t) = I_a(M_R^x(R t)),
* M_R = M_R^x R,
* delta_R^x, delta_R = delta_R^x R  with values in T ⊗ T+,
* M_R^+ on T+ and delta_R^+ on T+ ⊗ T+.

Everything is exact over the rationals.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .algebra import LinComb, apply_slot, lift_multiplicative, lift_multiplicative_plus, tensor
from .hopf import HopfStructure
from .rules import Basis, EquationSpec, closure_check
from .trees import (KERNEL, NOISE, ZERO_DEGREE, Degree, PlusTree, Tree, midx_add, midx_factorial,
                    midx_of_norm_below, midx_zero, parse_tree, unit_midx)


class CharacterError(ValueError):
    pass


# ---------------------------------------------------------------------------
# root extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Extraction:
    """A rooted subtree sigma of tau together with the contracted tree.

    ``shape`` is sigma with all node decorations removed; ``poly`` and ``ext``
    are the decorations of sigma's nodes summed up, ``pruned`` the branches
    hanging off sigma (as (edge, child) pairs).
    """

    shape: Tree
    poly: tuple
    ext: Degree
    pruned: tuple

    def contract(self, with_ext: bool = True) -> Tree:
        ext = self.ext + self.shape.formal_degree if with_ext else self.ext
        return Tree(self.poly, ext, self.pruned)


def _rooted_subtrees(t: Tree) -> list:
    """All (shape, poly, ext, pruned) with shape a rooted subtree of t.

    Edges are enumerated individually, so identical branches give repeated
    entries, as in a sum over edge sets.
    """
    d = t.dim
    options = [[(None, (), t.poly, t.ext, ())]]
    for edge, child in t.children:
        opts = [("cut", None, midx_zero(d), ZERO_DEGREE, ((edge, child),))]
        if edge[0] == NOISE:
            opts.append(("keep", (edge, Tree.one(d)), midx_zero(d), ZERO_DEGREE, ()))
        else:
            for shape, poly, ext, pruned in _rooted_subtrees(child):
                opts.append(("keep", (edge, shape), poly, ext, pruned))
        options.append(opts)
    out = [([], t.poly, t.ext, [])]
    for opts in options[1:]:
        nxt = []
        for kept, poly, ext, pruned in out:
            for kind, item, p2, e2, pr2 in opts:
                nxt.append((kept + ([item] if item is not None else []),
                            midx_add(poly, p2), ext + e2, pruned + list(pr2)))
        out = nxt
    return [(Tree(midx_zero(d), children=kept), poly, ext, tuple(pruned))
            for kept, poly, ext, pruned in out]


def extractions(t: Tree) -> list:
    return [Extraction(*x) for x in _rooted_subtrees(t)]


def extractable(shape: Tree, alpha, beta, bare_noise: bool = False) -> bool:
    """Shapes that a character may charge: negative, not planted, with noise."""
    if shape.is_unit() or shape.is_planted() or shape.noises == 0:
        return False
    if shape.formal_degree.evaluate(alpha, beta) >= 0:
        return False
    if not bare_noise and shape == Tree.xi(shape.dim):
        return False
    return True


def delta_r(t: Tree, alpha, beta, bare_noise: bool = False, with_ext: bool = True) -> LinComb:
    """Root extraction: 1 ⊗ t plus sigma ⊗ C_sigma(t) over divergent rooted subtrees."""
    out = LinComb.of((Tree.one(t.dim), t))
    for ex in extractions(t):
        if extractable(ex.shape, alpha, beta, bare_noise):
            out._acc((ex.shape, ex.contract(with_ext)), Fraction(1))
    return out


# ---------------------------------------------------------------------------
# characters and preparation maps
# ---------------------------------------------------------------------------

class Character:
    """Rational values on undecorated negative trees; 1 on the empty extraction."""

    def __init__(self, values: dict | None = None):
        self.values: dict = {}
        for t, v in (values or {}).items():
            if isinstance(v, float):
                raise CharacterError("character values must be rational")
            v = Fraction(v)
            if v:
                self.values[t] = v

    def __call__(self, t: Tree) -> Fraction:
        if t.is_unit():
            return Fraction(1)
        return self.values.get(t, Fraction(0))

    def __len__(self) -> int:
        return len(self.values)

    def support(self) -> list:
        return sorted(self.values, key=lambda t: t.key)

    def validate(self, basis: Basis) -> None:
        spec = basis.spec
        trees = set(basis.trees)
        for t in self.values:
            if t not in trees:
                raise CharacterError(f"{t.key} is not in the basis")
            if any(t.poly) or _has_decorations(t):
                raise CharacterError(f"{t.key} carries node decorations")
            if not extractable(t, spec.alpha, spec.beta, spec.extract_bare_noise):
                raise CharacterError(f"{t.key} is not an extractable negative tree")

    def to_json_obj(self) -> list:
        return [{"tree": t.key, "value": str(self.values[t])} for t in self.support()]

    @classmethod
    def from_json_obj(cls, obj: list, d: int | None = None) -> "Character":
        return cls({parse_tree(item["tree"], d): Fraction(item["value"]) for item in obj})

    @classmethod
    def load(cls, path, d: int | None = None) -> "Character":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh), d)


def _has_decorations(t: Tree) -> bool:
    if any(t.poly) or not t.ext.is_zero():
        return True
    return any(_has_decorations(c) for e, c in t.children if e[0] == KERNEL)


def character_candidates(basis: Basis) -> list:
    spec = basis.spec
    return [t for t in basis.trees
            if not _has_decorations(t)
            and extractable(t, spec.alpha, spec.beta, spec.extract_bare_noise)]


def random_character(basis: Basis, rng: random.Random, max_support: int | None = None) -> Character:
    cands = character_candidates(basis)
    if not cands:
        return Character()
    k = rng.randint(1, len(cands) if max_support is None else min(max_support, len(cands)))
    chosen = rng.sample(cands, k)
    values = {}
    for t in chosen:
        num = rng.choice([n for n in range(-6, 7) if n])
        values[t] = Fraction(num, rng.randint(1, 5))
    return Character(values)


@dataclass
class PreparationMap:
    """A linear map R on trees; ``apply`` gives R on a single tree."""

    apply: Callable
    declared_degree_preserving: bool = False
    name: str = "R"
    _memo: dict = field(default_factory=dict, repr=False)

    def __call__(self, t: Tree) -> LinComb:
        out = self._memo.get(t)
        if out is None:
            out = self.apply(t)
            self._memo[t] = out
        return out

    def lin(self, u: LinComb) -> LinComb:
        return u.map(self)


def identity_preparation() -> PreparationMap:
    return PreparationMap(LinComb.of, True, "id")


def make_R_ell(ell: Character, alpha, beta, bare_noise: bool = False,
               with_ext: bool = True) -> PreparationMap:
    """R_ell = (ell ⊗ Id) delta_r.

    With ``with_ext`` false the contracted node keeps degree zero, which
    raises the degree and breaks degree preservation.
    """
    alpha = Fraction(alpha)
    beta = Fraction(beta)

    def apply(t: Tree) -> LinComb:
        out = LinComb.of(t)
        if not ell.values:
            return out
        for ex in extractions(t):
            c = ell.values.get(ex.shape)
            if c and extractable(ex.shape, alpha, beta, bare_noise):
                out._acc(ex.contract(with_ext), c)
        return out

    return PreparationMap(apply, with_ext, "R_ell" if with_ext else "R_ell_noext")


def validate_preparation(R: PreparationMap, basis: Basis, hopf: HopfStructure | None = None) -> dict:
    """Triangular form of R and (R ⊗ Id) Delta = Delta R on every basis tree."""
    spec = basis.spec
    hopf = hopf or spec.hopf()
    failures = []
    for t in basis.trees:
        rt = R(t)
        dt = spec.deg(t)
        if rt.coefficient(t) != 1:
            failures.append({"tree": t.key, "condition": "leading term"})
        for s, c in rt.items():
            if s == t:
                continue
            if spec.deg(s) < dt or s.noises >= t.noises:
                failures.append({"tree": t.key, "condition": "triangular", "term": s.key})
        if t.is_polynomial() and rt != LinComb.of(t):
            failures.append({"tree": t.key, "condition": "fixes polynomials"})
        if t.is_planted() and rt != LinComb.of(t):
            failures.append({"tree": t.key, "condition": "planted"})
        lhs = apply_slot(hopf.coaction(t), 0, R)
        rhs = hopf.coaction_lin(rt)
        if lhs != rhs:
            failures.append({"tree": t.key, "condition": "commutes with Delta"})
    return {"ok": not failures, "failures": failures, "checked": len(basis.trees)}


def is_degree_preserving(R: PreparationMap, basis: Basis) -> bool:
    spec = basis.spec
    for t in basis.trees:
        dt = spec.deg(t)
        for s, _c in R(t).items():
            if s != t and (spec.deg(s) != dt or s.noises >= t.noises):
                return False
    return True


# ---------------------------------------------------------------------------
# the tower
# ---------------------------------------------------------------------------

class Renormalization:
    """All maps derived from one preparation map, memoized."""

    def __init__(self, R: PreparationMap, hopf: HopfStructure):
        self.R = R
        self.hopf = hopf
        self._mx: dict = {}
        self._dx: dict = {}
        self._mplus: dict = {}
        self._dplus: dict = {}
        d = hopf.d
        self._mx_mul = lift_multiplicative(
            lambda a, t: self.M_times_lin(self.R(t)).map(lambda s: LinComb.of(s.planted(a))),
            lambda i, d: LinComb.of(Tree.monomial(unit_midx(d, i))),
            lambda d: LinComb.of(Tree.xi(d)),
            lambda e, d: LinComb.of(Tree.ext_node(e, d)),
            lambda d: LinComb.of(Tree.one(d)),
        )
        self._dx_mul = lift_multiplicative(
            self._delta_times_planted,
            lambda i, d: LinComb.of((Tree.monomial(unit_midx(d, i)), PlusTree.one(d))),
            lambda d: LinComb.of((Tree.xi(d), PlusTree.one(d))),
            lambda e, d: LinComb.of((Tree.ext_node(e, d), PlusTree.one(d))),
            lambda d: LinComb.of((Tree.one(d), PlusTree.one(d))),
        )
        self._mplus_mul = lift_multiplicative_plus(
            self._M_plus_planted,
            lambda i, d: LinComb.of(PlusTree.monomial(unit_midx(d, i))),
            lambda d: LinComb.of(PlusTree.one(d)),
        )

    def deg(self, t) -> Fraction:
        return self.hopf.deg(t)

    # M_R^x and M_R
    def M_times(self, t: Tree) -> LinComb:
        out = self._mx.get(t)
        if out is None:
            out = self._mx_mul(t)
            self._mx[t] = out
        return out

    def M_times_lin(self, u: LinComb) -> LinComb:
        return u.map(self.M_times)

    def M(self, t: Tree) -> LinComb:
        return self.M_times_lin(self.R(t))

    def M_lin(self, u: LinComb) -> LinComb:
        return u.map(self.M)

    # delta_R^x and delta_R
    def delta_times(self, t: Tree) -> LinComb:
        out = self._dx.get(t)
        if out is None:
            out = self._dx_mul(t)
            self._dx[t] = out
        return out

    def delta_times_lin(self, u: LinComb) -> LinComb:
        return u.map(self.delta_times)

    def _delta_times_planted(self, a, t: Tree) -> LinComb:
        hopf = self.hopf
        inner = self.delta_times_lin(self.R(t))
        floor = hopf.planted_degree(a, t)
        out = LinComb()
        for (s, p), c in inner.items():
            out._acc((s.planted(a), p), c)
            for l in hopf.shifts(a, s):
                if sum(l) < floor:
                    continue
                right = PlusTree.planted(midx_add(a, l), s) * p
                out._acc((Tree.monomial(l), right), -c / midx_factorial(l))
        return out

    def delta(self, t: Tree) -> LinComb:
        """delta_R = delta_R^x R."""
        return self.delta_times_lin(self.R(t))

    def delta_lin(self, u: LinComb) -> LinComb:
        return u.map(self.delta)

    def delta_via_theta(self, t: Tree) -> LinComb:
        """delta_R from Theta(delta_R t) = (M_R ⊗ M_R^+) Delta t."""
        return self.hopf.theta_inverse_closed(self.condition_rhs(t))

    def condition_rhs(self, t: Tree) -> LinComb:
        dt = self.hopf.coaction(t)
        return apply_slot(apply_slot(dt, 0, self.M), 1, self.M_plus)

    # M_R^+ and delta_R^+
    def M_plus(self, p: PlusTree) -> LinComb:
        out = self._mplus.get(p)
        if out is None:
            out = self._mplus_mul(p)
            self._mplus[p] = out
        return out

    def M_plus_lin(self, u: LinComb) -> LinComb:
        return u.map(self.M_plus)

    def _M_plus_planted(self, a, t: Tree) -> LinComb:
        out = LinComb()
        for (s, q), c in self.delta(t).items():
            if self.hopf.planted_degree(a, s) > 0:
                out._acc(PlusTree.planted(a, s) * q, c)
        return out

    def delta_plus(self, p: PlusTree) -> LinComb:
        out = self._dplus.get(p)
        if out is None:
            out = self.hopf.theta_inverse_closed(self.delta_plus_rhs(p), plus=True)
            self._dplus[p] = out
        return out

    def delta_plus_rhs(self, p: PlusTree) -> LinComb:
        """(S+ M_R^+ S+ ⊗ M_R^+) Delta+ p."""
        hopf = self.hopf

        def left(q):
            return hopf.antipode_lin(self.M_plus_lin(hopf.antipode(q)))

        return apply_slot(apply_slot(hopf.coproduct_plus(p), 0, left), 1, self.M_plus)


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------

def _min_left_degree(hopf: HopfStructure, u: LinComb):
    degs = [hopf.deg(b[0]) for b, _ in u.items()]
    return min(degs) if degs else None


def preparation_suite(basis: Basis, R: PreparationMap, check_neumann: bool = True) -> dict:
    """Checks tied to an arbitrary preparation map; exact."""
    spec = basis.spec
    hopf = spec.hopf()
    ren = Renormalization(R, hopf)
    report = {"validate_preparation": validate_preparation(R, basis, hopf)}
    bad_routes, bad_tri, bad_cond, bad_inv, bad_mplus = [], [], [], [], []
    for t in basis.trees:
        d1 = ren.delta(t)
        if d1 != ren.delta_via_theta(t):
            bad_routes.append(t.key)
        m = _min_left_degree(hopf, d1)
        if m is not None and m < spec.deg(t):
            bad_tri.append(t.key)
        if hopf.theta(d1) != ren.condition_rhs(t):
            bad_cond.append(t.key)
    if check_neumann:
        for t in basis.trees:
            for p in basis.plus_trees:
                u = LinComb.of((t, p))
                inv = hopf.theta_inverse_neumann(u)
                if inv != hopf.theta_inverse_closed(u) or hopf.theta(inv) != u:
                    bad_inv.append(f"{t.key} ⊗ {p.key}")
    for p in basis.plus_trees:
        for q, _c in ren.M_plus(p).items():
            if spec.deg(q) < spec.deg(p):
                bad_mplus.append(p.key)
                break
    report.update({
        "two_routes": {"ok": not bad_routes, "failures": bad_routes},
        "upper_triangular": {"ok": not bad_tri, "failures": bad_tri},
        "condition_round_trip": {"ok": not bad_cond, "failures": bad_cond},
        "inverse_neumann_closed": {"ok": not bad_inv, "failures": bad_inv},
        "M_plus_degree": {"ok": not bad_mplus, "failures": bad_mplus},
    })
    report["ok"] = all(v["ok"] for v in report.values() if isinstance(v, dict))
    return report


def degree_preserving_suite(basis: Basis, R: PreparationMap) -> dict:
    """Identities that hold when R is degree preserving; returns first witnesses."""
    spec = basis.spec
    hopf = spec.hopf()
    ren = Renormalization(R, hopf)
    one = PlusTree.one(spec.d)
    checks = {
        "degree_preserving": [],
        "simple_delta_R": [],
        "cointeraction": [],
        "cointeraction_times": [],
        "cointeraction_plus": [],
        "antipode_commutes": [],
        "M_plus_degree_preserving": [],
        "commutes_with_I": [],
    }
    if not is_degree_preserving(R, basis):
        checks["degree_preserving"].append("R")
    for t in basis.trees:
        if ren.delta(t) != tensor(ren.M(t), LinComb.of(one)):
            checks["simple_delta_R"].append(t.key)
        dt = hopf.coaction(t)
        lhs = hopf.coaction_lin(ren.M(t))
        rhs = apply_slot(apply_slot(dt, 0, ren.M), 1, ren.M_plus)
        if lhs != rhs:
            checks["cointeraction"].append(t.key)
        lhs = hopf.coaction_lin(ren.M_times(t))
        rhs = apply_slot(apply_slot(dt, 0, ren.M_times), 1, ren.M_plus)
        if lhs != rhs:
            checks["cointeraction_times"].append(t.key)
        for a in spec.kernel_indices():
            if ren.M(t.planted(a)) != ren.M(t).map(lambda s: LinComb.of(s.planted(a))):
                checks["commutes_with_I"].append(f"I_{a}[{t.key}]")
    for p in basis.plus_trees:
        mp = ren.M_plus(p)
        lhs = apply_slot(apply_slot(hopf.coproduct_plus(p), 0, ren.M_plus), 1, ren.M_plus)
        if lhs != hopf.coproduct_plus_lin(mp):
            checks["cointeraction_plus"].append(p.key)
        if hopf.antipode_lin(mp) != ren.M_plus_lin(hopf.antipode(p)):
            checks["antipode_commutes"].append(p.key)
        if any(spec.deg(q) != spec.deg(p) for q, _ in mp.items()):
            checks["M_plus_degree_preserving"].append(p.key)
    report = {k: {"ok": not v, "failures": v} for k, v in checks.items()}
    report["ok"] = all(v["ok"] for v in report.values())
    return report


def delta_plus_audit(basis: Basis, R: PreparationMap) -> dict:
    """Round trip of the defining relation of delta_R^+ and a triangularity audit."""
    spec = basis.spec
    hopf = spec.hopf()
    ren = Renormalization(R, hopf)
    bad_rt, non_tri = [], []
    for p in basis.plus_trees:
        dp = ren.delta_plus(p)
        if hopf.theta(dp, plus=True) != ren.delta_plus_rhs(p):
            bad_rt.append(p.key)
        m = _min_left_degree(hopf, dp)
        if m is not None and m < spec.deg(p):
            non_tri.append(p.key)
    return {"round_trip": {"ok": not bad_rt, "failures": bad_rt},
            "upper_triangular_observed": {"ok": not non_tri, "failures": non_tri},
            "ok": not bad_rt}


def hopf_suite(basis: Basis) -> dict:
    hopf = basis.spec.hopf()
    coassoc, antipode, comodule = [], [], []
    for p in basis.plus_trees:
        if hopf.coassociativity_defect(p):
            coassoc.append(p.key)
        left, right = hopf.antipode_defects(p)
        if left or right:
            antipode.append(p.key)
    for t in basis.trees:
        if hopf.comodule_defect(t):
            comodule.append(t.key)
    report = {
        "coassociativity": {"ok": not coassoc, "failures": coassoc},
        "antipode": {"ok": not antipode, "failures": antipode},
        "comodule": {"ok": not comodule, "failures": comodule},
    }
    ok, esc = closure_check(basis, hopf)
    report["closure"] = {"ok": ok, "failures": [f"{a} -> {b}" for a, b in esc]}
    report["ok"] = all(v["ok"] for v in report.values())
    return report


__all__ = [
    "Extraction", "extractions", "extractable", "delta_r", "Character", "CharacterError",
    "character_candidates", "random_character", "PreparationMap", "identity_preparation",
    "make_R_ell", "validate_preparation", "is_degree_preserving", "Renormalization",
    "preparation_suite", "degree_preserving_suite", "delta_plus_audit", "hopf_suite",
]
