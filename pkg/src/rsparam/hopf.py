"""Coaction on trees, coproduct and antipode of the positive Hopf algebra.

Planted factors I+_b(tau) of non-positive degree vanish; this is what makes
the sums over derivative shifts finite.
"""
from __future__ import annotations

from fractions import Fraction

from .algebra import (LinComb, apply_slot, lift_multiplicative, lift_multiplicative_plus,
                      m_plus, plus_unit, tensor)
from .trees import (PlusTree, Tree, midx_add, midx_below, midx_factorial, midx_of_norm_below,
                    midx_zero, unit_midx)


class HopfStructure:
    """Coaction, coproduct and antipode for fixed (alpha, beta, d).

    Results are memoized per canonical tree.
    """

    def __init__(self, alpha, beta, d: int = 1):
        self.alpha = Fraction(alpha)
        self.beta = Fraction(beta)
        self.d = d
        self._delta: dict = {}
        self._delta_plus: dict = {}
        self._antipode: dict = {}
        self._coaction_mul = lift_multiplicative(
            self._coaction_planted,
            lambda i, d: LinComb({(Tree.monomial(unit_midx(d, i)), PlusTree.one(d)): 1,
                                  (Tree.one(d), PlusTree.monomial(unit_midx(d, i))): 1}),
            lambda d: LinComb.of((Tree.xi(d), PlusTree.one(d))),
            lambda e, d: LinComb.of((Tree.ext_node(e, d), PlusTree.one(d))),
            lambda d: LinComb.of((Tree.one(d), PlusTree.one(d))),
        )
        self._coproduct_mul = lift_multiplicative_plus(
            self._coproduct_planted,
            lambda i, d: LinComb({(PlusTree.monomial(unit_midx(d, i)), PlusTree.one(d)): 1,
                                  (PlusTree.one(d), PlusTree.monomial(unit_midx(d, i))): 1}),
            lambda d: LinComb.of((PlusTree.one(d), PlusTree.one(d))),
        )
        self._antipode_mul = lift_multiplicative_plus(
            self._antipode_planted,
            lambda i, d: LinComb.of(PlusTree.monomial(unit_midx(d, i)), -1),
            plus_unit,
        )

    # -- degrees --------------------------------------------------------
    def deg(self, t) -> Fraction:
        return t.formal_degree.evaluate(self.alpha, self.beta)

    def planted_degree(self, a, t: Tree) -> Fraction:
        return self.deg(t) + self.beta - sum(a)

    def plus_planted(self, a, t: Tree) -> LinComb:
        """I+_a(t), or zero when deg I_a(t) <= 0."""
        if self.planted_degree(a, t) > 0:
            return LinComb.of(PlusTree.planted(a, t))
        return LinComb()

    def shifts(self, a, t: Tree) -> list:
        """All l with I+_{a+l}(t) non-zero."""
        return midx_of_norm_below(t.dim, self.planted_degree(a, t))

    # -- coaction -------------------------------------------------------
    def coaction(self, t: Tree) -> LinComb:
        """Delta: T -> T ⊗ T+."""
        out = self._delta.get(t)
        if out is None:
            out = self._coaction_mul(t)
            self._delta[t] = out
        return out

    def _coaction_planted(self, a, t: Tree) -> LinComb:
        out = LinComb()
        for (s, p), c in self.coaction(t).items():
            out._acc((s.planted(a), p), c)
        bound = self.planted_degree(a, t)
        for k in midx_of_norm_below(t.dim, bound):
            planted = PlusTree.planted(midx_add(a, k), t)
            for l in midx_below(k):
                m = tuple(x - y for x, y in zip(k, l))
                coef = Fraction(1, midx_factorial(l) * midx_factorial(m))
                out._acc((Tree.monomial(l), PlusTree(m, planted.factors)), coef)
        return out

    # -- positive coproduct ---------------------------------------------
    def coproduct_plus(self, p: PlusTree) -> LinComb:
        """Delta+: T+ -> T+ ⊗ T+."""
        out = self._delta_plus.get(p)
        if out is None:
            out = self._coproduct_mul(p)
            self._delta_plus[p] = out
        return out

    def _coproduct_planted(self, a, t: Tree) -> LinComb:
        d = t.dim
        out = LinComb.of((PlusTree.one(d), PlusTree.planted(a, t)))
        for (s, q), c in self.coaction(t).items():
            for l in self.shifts(a, s):
                sign = -1 if sum(l) % 2 else 1
                coef = Fraction(sign, midx_factorial(l))
                right = PlusTree(midx_add(l, q.poly), q.factors)
                out._acc((PlusTree.planted(midx_add(a, l), s), right), c * coef)
        return out

    # -- antipode -------------------------------------------------------
    def antipode(self, p: PlusTree) -> LinComb:
        out = self._antipode.get(p)
        if out is None:
            out = self._antipode_mul(p)
            self._antipode[p] = out
        return out

    def _antipode_planted(self, a, t: Tree) -> LinComb:
        out = LinComb()
        for (s, q), c in self.coaction(t).items():
            sq = self.antipode(q)
            for l in self.shifts(a, s):
                left = PlusTree.planted(midx_add(a, l), s)
                coef = Fraction(-1, midx_factorial(l))
                for r, cr in sq.items():
                    out._acc(left * PlusTree(midx_add(l, r.poly), r.factors), c * cr * coef)
        return out

    # -- linear extensions ----------------------------------------------
    def coaction_lin(self, u: LinComb) -> LinComb:
        return u.map(self.coaction)

    def coproduct_plus_lin(self, u: LinComb) -> LinComb:
        return u.map(self.coproduct_plus)

    def antipode_lin(self, u: LinComb) -> LinComb:
        return u.map(self.antipode)

    # -- the map (Id ⊗ M+)(Delta ⊗ Id) and its inverse ---------------------
    def theta(self, u: LinComb, plus: bool = False) -> LinComb:
        """(Id ⊗ M+)(Delta ⊗ Id) on T ⊗ T+ (or Delta+ on T+ ⊗ T+ when plus)."""
        split = self.coproduct_plus if plus else self.coaction
        out = LinComb()
        for (s, r), c in u.items():
            for (s1, s2), c1 in split(s).items():
                out._acc((s1, s2 * r), c * c1)
        return out

    def theta_inverse_closed(self, u: LinComb, plus: bool = False) -> LinComb:
        """(Id ⊗ M+)(Id ⊗ S+ ⊗ Id)(Delta ⊗ Id)."""
        split = self.coproduct_plus if plus else self.coaction
        out = LinComb()
        for (s, r), c in u.items():
            for (s1, s2), c1 in split(s).items():
                for q, cq in self.antipode(s2).items():
                    out._acc((s1, q * r), c * c1 * cq)
        return out

    def theta_inverse_neumann(self, u: LinComb, plus: bool = False, max_terms: int = 10_000) -> LinComb:
        """Sum_k (-N)^k u with N = theta - Id; N is nilpotent."""
        total = u.copy()
        term = u
        for _ in range(max_terms):
            term = (self.theta(term, plus) - term).scale(-1)
            if not term:
                return total
            total.iadd(term)
        raise RuntimeError("Neumann series did not terminate; nilpotence violated")

    # -- identity checks --------------------------------------------------
    def coassociativity_defect(self, p: PlusTree) -> LinComb:
        dp = self.coproduct_plus(p)
        lhs = apply_slot(dp, 0, self.coproduct_plus)
        rhs = apply_slot(dp, 1, self.coproduct_plus)
        return lhs - rhs

    def antipode_defects(self, p: PlusTree) -> tuple:
        dp = self.coproduct_plus(p)
        eps = LinComb.of(PlusTree.one(p.dim)) if p.is_unit() else LinComb()
        left = m_plus(apply_slot(dp, 0, self.antipode))
        right = m_plus(apply_slot(dp, 1, self.antipode))
        return left - eps, right - eps

    def comodule_defect(self, t: Tree) -> LinComb:
        dt = self.coaction(t)
        lhs = apply_slot(dt, 0, self.coaction)
        rhs = apply_slot(dt, 1, self.coproduct_plus)
        return lhs - rhs

    def antipode_multiplicativity_defect(self, p: PlusTree, q: PlusTree) -> LinComb:
        return self.antipode(p * q) - self.antipode(p) * self.antipode(q)


def monomial_over_factorial(k) -> LinComb:
    return LinComb.of(PlusTree.monomial(k), Fraction(1, midx_factorial(k)))


__all__ = ["HopfStructure", "monomial_over_factorial", "tensor"]
