"""Smooth admissible models on a grid and their renormalised versions.

Two-variable objects such as (y, z) -> (Pi_y tau)(z) are never stored as
n x n arrays.  They are finite sums  sum_sigma b_sigma(y) (Pi sigma)(z),
kept as a dict  sigma -> coefficient field b_sigma.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..algebra import LinComb
from ..hopf import HopfStructure
from ..renorm import Renormalization
from ..trees import KERNEL, PlusTree, Tree
from .grid import Grid
from .spectral import Kernel, LittlewoodPaley


def _acc(out: dict, key, field):
    prev = out.get(key)
    out[key] = field.copy() if prev is None else prev + field


class ModelBase:
    """Common interface: Pi, g_inv, g and the derived coefficient fields."""

    grid: Grid
    hopf: HopfStructure
    kernel: Kernel

    def Pi(self, t: Tree) -> np.ndarray:
        raise NotImplementedError

    def g_inv(self, p: PlusTree) -> np.ndarray:
        raise NotImplementedError

    def Pi_lin(self, u: LinComb) -> np.ndarray:
        out = np.zeros(self.grid.n)
        for t, c in u.items():
            out += float(c) * self.Pi(t)
        return out

    def g_inv_lin(self, u: LinComb) -> np.ndarray:
        out = np.zeros(self.grid.n)
        for p, c in u.items():
            out += float(c) * self.g_inv(p)
        return out

    def g(self, p: PlusTree) -> np.ndarray:
        """x -> g_x(p) = g_x^{-1}(S+ p)."""
        key = ("g", p)
        out = self._gcache.get(key)
        if out is None:
            out = self.g_inv_lin(self.hopf.antipode(p))
            self._gcache[key] = out
        return out

    def g_lin(self, u: LinComb) -> np.ndarray:
        out = np.zeros(self.grid.n)
        for p, c in u.items():
            out += float(c) * self.g(p)
        return out

    def recentred(self, t: Tree) -> dict:
        """Pi_x t = sum_sigma b_sigma(x) Pi sigma, returned as {sigma: b_sigma}."""
        key = ("rec", t)
        out = self._gcache.get(key)
        if out is None:
            out = {}
            for (s, p), c in self.hopf.coaction(t).items():
                _acc(out, s, float(c) * self.g_inv(p))
            self._gcache[key] = out
        return out

    def expansion(self, t: Tree) -> dict:
        """Pi t = sum_sigma a_sigma(x) Pi_x sigma, returned as {sigma: a_sigma = g(t/sigma)}."""
        key = ("exp", t)
        out = self._gcache.get(key)
        if out is None:
            out = {}
            for (s, p), c in self.hopf.coaction(t).items():
                _acc(out, s, float(c) * self.g(p))
            self._gcache[key] = out
        return out

    def Pi_x_at(self, t: Tree, i: int) -> np.ndarray:
        """y -> (Pi_{x_i} t)(y)."""
        out = np.zeros(self.grid.n)
        for s, b in self.recentred(t).items():
            out += b[i] * self.Pi(s)
        return out

    def Pi_x_point(self, t: Tree, i: int, k: int) -> float:
        """(Pi_{x_i} t)(x_k)."""
        return float(sum(b[i] * self.Pi(s)[k] for s, b in self.recentred(t).items()))


class CanonicalModel(ModelBase):
    """Pi(Xi) = noise, Pi(X^k) = x^k, extended decorations realised by 1,
    Pi multiplicative and Pi(I_a t) = D^a K * Pi t;
    g_x^{-1}(I+_a t) = -(D^a K * Pi_x t)(x)."""

    def __init__(self, grid: Grid, hopf: HopfStructure, noise: np.ndarray, kernel: Kernel | None = None):
        if hopf.d != 1:
            raise ValueError("the model lab works in dimension d = 1")
        self.grid = grid
        self.hopf = hopf
        self.noise = np.asarray(noise, dtype=float)
        if not np.all(np.isfinite(self.noise)):
            raise ValueError("noise contains non-finite values")
        self.kernel = kernel or Kernel(grid, float(hopf.beta))
        self._pi: dict = {}
        self._ginv: dict = {}
        self._gcache: dict = {}

    def Pi(self, t: Tree) -> np.ndarray:
        out = self._pi.get(t)
        if out is None:
            out = self.grid.x ** t.poly[0] if t.poly[0] else np.ones(self.grid.n)
            for edge, child in t.children:
                if edge[0] == KERNEL:
                    out = out * self.kernel.convolve(self.Pi(child), edge[1][0])
                else:
                    out = out * self.noise
            self._pi[t] = out
        return out

    def g_inv(self, p: PlusTree) -> np.ndarray:
        out = self._ginv.get(p)
        if out is None:
            out = (-self.grid.x) ** p.poly[0] if p.poly[0] else np.ones(self.grid.n)
            for a, arg in p.factors:
                out = out * self._g_inv_planted(a, arg)
            self._ginv[p] = out
        return out

    def _g_inv_planted(self, a, t: Tree) -> np.ndarray:
        out = np.zeros(self.grid.n)
        for s, b in self.recentred(t).items():
            out -= b * self.Pi(s.planted(a))
        return out


class RenormalizedModel(ModelBase):
    """Pi^R t = Pi(M_R t), (g^R)^{-1}(p) = g^{-1}(M_R^+ p)."""

    def __init__(self, base: CanonicalModel, ren: Renormalization):
        self.base = base
        self.ren = ren
        self.grid = base.grid
        self.hopf = base.hopf
        self.kernel = base.kernel
        self._pi: dict = {}
        self._ginv: dict = {}
        self._gcache: dict = {}

    def Pi(self, t: Tree) -> np.ndarray:
        out = self._pi.get(t)
        if out is None:
            out = self.base.Pi_lin(self.ren.M(t))
            self._pi[t] = out
        return out

    def g_inv(self, p: PlusTree) -> np.ndarray:
        out = self._ginv.get(p)
        if out is None:
            out = self.base.g_inv_lin(self.ren.M_plus(p))
            self._ginv[p] = out
        return out

    def g_via_antipodes(self, p: PlusTree) -> np.ndarray:
        """g^R(p) = g(S+ M_R^+ S+ p)."""
        hopf = self.hopf
        u = hopf.antipode_lin(self.ren.M_plus_lin(hopf.antipode(p)))
        return self.base.g_lin(u)


def canonical_model(spec, grid: Grid, noise: np.ndarray) -> CanonicalModel:
    return CanonicalModel(grid, spec.hopf(), noise)


def renormalized_model(model: CanonicalModel, R) -> RenormalizedModel:
    return RenormalizedModel(model, Renormalization(R, model.hopf))


def scale_of(*fields) -> float:
    return max((float(np.max(np.abs(f))) for f in fields if np.size(f)), default=0.0)


def rel_error(a: np.ndarray, b: np.ndarray, scale: float | None = None) -> float:
    s = scale if scale is not None else scale_of(a, b)
    d = float(np.max(np.abs(a - b))) if np.size(a) else 0.0
    return d / s if s > 0 else d


__all__ = ["ModelBase", "CanonicalModel", "RenormalizedModel", "canonical_model",
           "renormalized_model", "rel_error", "scale_of", "Fraction"]
