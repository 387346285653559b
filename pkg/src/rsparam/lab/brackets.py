"""Paracontrolled brackets of a model and of its renormalised version.

Convention: Pi tau = [tau] + sum_{1 < sigma < tau} P_{g(tau/sigma)} [sigma],
where sigma runs over the left factors of Delta tau and
g(tau/sigma)(x) = sum_p c_{sigma,p} g_x(p).  The term sigma = 1 drops
because P_f 1 = 0.
"""
from __future__ import annotations

import numpy as np

from ..trees import Tree
from .model import CanonicalModel, ModelBase, RenormalizedModel, _acc


class BracketMap:
    """[tau] for a model, computed by the defining recursion."""

    def __init__(self, model: ModelBase, lp):
        self.model = model
        self.lp = lp
        self._memo: dict = {}

    def __call__(self, t: Tree) -> np.ndarray:
        out = self._memo.get(t)
        if out is None:
            out = self.model.Pi(t).copy()
            for s, a in self.model.expansion(t).items():
                if s == t or s.is_unit():
                    continue
                out -= self.lp.paraproduct(a, self(s))
            self._memo[t] = out
        return out

    def lin(self, u) -> np.ndarray:
        out = np.zeros(self.model.grid.n)
        for t, c in u.items():
            out += float(c) * self(t)
        return out

    def reconstruct(self, t: Tree) -> np.ndarray:
        """sum_{sigma <= tau} P_{g(tau/sigma)}[sigma] with the top term [tau]."""
        out = self(t).copy()
        for s, a in self.model.expansion(t).items():
            if s == t or s.is_unit():
                continue
            out += self.lp.paraproduct(a, self(s))
        return out


def extract_brackets(model: ModelBase, lp, trees) -> dict:
    bm = BracketMap(model, lp)
    return {t: bm(t) for t in trees}


def renormalized_brackets_direct(rmodel: RenormalizedModel, lp, trees) -> dict:
    """[tau]^R read off from the renormalised model itself."""
    return extract_brackets(rmodel, lp, trees)


class ChainInverse:
    """Coefficients b(tau/sigma) of the inverse of the unitriangular matrix
    a(tau/sigma), by the chain recursion b(tau/sigma) = -sum_{sigma <= rho < tau}
    a(tau/rho) b(rho/sigma), b(sigma/sigma) = 1."""

    def __init__(self, coeffs):
        self.coeffs = coeffs
        self._memo: dict = {}

    def __call__(self, t: Tree) -> dict:
        out = self._memo.get(t)
        if out is None:
            out = {}
            for r, a in self.coeffs(t).items():
                if r == t:
                    continue
                for s, b in self(r).items():
                    _acc(out, s, -a * b)
            out[t] = np.ones_like(next(iter(self.coeffs(t).values())))
            self._memo[t] = out
        return out


class FormulaBrackets:
    """[tau]^R from the original brackets, commutators, P-bar and S.

    [tau]^R = - sum_{1<rho<sigma<tau} R(b^R(tau/sigma), g^R(sigma/rho), [rho]^R)
              + P-bar((Pi^R_y tau)(z)) + S(Pi^R tau),
    P-bar((Pi^R_y tau)(z)) = sum_{kappa} P_{h(tau/kappa)} [kappa]
              + sum_{1<kappa<rho} R((h b)(tau/rho), g(rho/kappa), [kappa]),
    with h(tau/kappa) = g^{-1}(tau /^R kappa) read from delta_R tau and
    b^R, b the chain inverses of g^R(./.), g(./.).
    """

    def __init__(self, rmodel: RenormalizedModel, lp, base_brackets: BracketMap | None = None):
        self.rmodel = rmodel
        self.base: CanonicalModel = rmodel.base
        self.lp = lp
        self.brackets = base_brackets or BracketMap(self.base, lp)
        self._aR: dict = {}
        self.bR = ChainInverse(self.a_R)
        self.b0 = ChainInverse(self.base.expansion)
        self._memo: dict = {}

    def a_R(self, t: Tree) -> dict:
        """g^R(tau/sigma) with g^R = g(S+ M_R^+ S+ .)."""
        out = self._aR.get(t)
        if out is None:
            out = {}
            for (s, p), c in self.rmodel.hopf.coaction(t).items():
                _acc(out, s, float(c) * self.rmodel.g_via_antipodes(p))
            self._aR[t] = out
        return out

    def h(self, t: Tree) -> dict:
        out = {}
        for (s, q), c in self.rmodel.ren.delta(t).items():
            _acc(out, s, float(c) * self.base.g_inv(q))
        return out

    def pbar_term(self, t: Tree) -> np.ndarray:
        lp, br = self.lp, self.brackets
        n = self.base.grid.n
        out = np.zeros(n)
        hb: dict = {}
        for s, hs in self.h(t).items():
            if not s.is_unit():
                out += lp.paraproduct(hs, br(s))
            for r, b in self.b0(s).items():
                _acc(hb, r, hs * b)
        for r, c in hb.items():
            for k, a in self.base.expansion(r).items():
                if k == r or k.is_unit():
                    continue
                out += lp.commutator(c, a, br(k))
        return out

    def __call__(self, t: Tree) -> np.ndarray:
        out = self._memo.get(t)
        if out is None:
            lp = self.lp
            out = self.pbar_term(t) + lp.smoothing(self.base.Pi_lin(self.rmodel.ren.M(t)))
            bR = self.bR(t)
            for s, b in bR.items():
                if s == t or s.is_unit():
                    continue
                for r, a in self.a_R(s).items():
                    if r == s or r.is_unit():
                        continue
                    out -= lp.commutator(b, a, self(r))
            self._memo[t] = out
        return out


def renormalized_brackets_formula(rmodel: RenormalizedModel, lp, trees,
                                  base_brackets: BracketMap | None = None) -> dict:
    fb = FormulaBrackets(rmodel, lp, base_brackets)
    return {t: fb(t) for t in trees}
