"""Numerical checks on smooth models: identities, brackets and scaling."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..renorm import PreparationMap
from ..rules import Basis
from ..trees import KERNEL, PlusTree, Tree, midx_add, midx_factorial, midx_of_norm_below
from .brackets import BracketMap, FormulaBrackets
from .grid import Grid, make_noise
from .model import RenormalizedModel, canonical_model, renormalized_model, rel_error, scale_of
from .spectral import LittlewoodPaley

FLOAT_FORMAT = "{:.6e}"


@dataclass
class Residual:
    """Largest relative residual of an identity over its instances."""

    name: str
    tol: float
    value: float = 0.0
    witness: str = ""
    count: int = 0

    def add(self, value: float, witness: str) -> None:
        self.count += 1
        if self.count == 1 or not value <= self.value:
            self.value = value if math.isfinite(value) else math.inf
            self.witness = witness

    @property
    def ok(self) -> bool:
        return bool(self.count > 0 and self.value <= self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "max": self.value, "tol": self.tol,
                "count": self.count, "witness": self.witness, "pass": self.ok}


def planted_pairs(basis: Basis) -> list:
    """All (a, tau) with I_a(tau) a kernel edge of some basis tree, in a fixed order."""
    seen = {}

    def walk(t: Tree):
        for edge, child in t.children:
            if edge[0] == KERNEL:
                seen[(edge[1], child)] = None
            walk(child)

    for t in basis.trees:
        walk(t)
    return sorted(seen, key=lambda p: (p[0], p[1].key))


# -- model identities ---------------------------------------------------------
def admissibility(model, pairs, core, name: str) -> Residual:
    """Pi(I_a tau) against an independent direct convolution of Pi tau."""
    res = Residual(name, 1e-10)
    for a, t in pairs:
        lhs = model.Pi(t.planted(a))
        rhs = model.kernel.convolve_direct(model.Pi(t), a[0])
        res.add(rel_error(lhs[core], rhs[core]), str(t.planted(a)))
    return res


def pi_mx(rm: RenormalizedModel, trees, points, core) -> Residual:
    """Pi^R_x tau = (Pi_x ⊗ g_x^{-1}) delta_R tau."""
    res = Residual("recentred_Pi", 1e-7)
    base = rm.base
    for t in trees:
        delta = rm.ren.delta(t)
        for i in points:
            lhs = rm.Pi_x_at(t, i)
            rhs = np.zeros_like(lhs)
            for (s, q), c in delta.items():
                rhs += float(c) * base.g_inv(q)[i] * base.Pi_x_at(s, i)
            res.add(rel_error(lhs[core], rhs[core]), f"{t} @ x{i}")
    return res


def g_inv_formula(rm: RenormalizedModel, pairs, points) -> Residual:
    """(g^R_x)^{-1}(I+_{a} tau) = -(D^a K * Pi^R_x tau)(x) for every non-zero I+_a tau."""
    res = Residual("g_inverse_formula", 1e-7)
    hopf = rm.hopf
    for a0, t in pairs:
        for l in hopf.shifts(a0, t):
            a = midx_add(a0, l)
            lhs = rm.g_inv(PlusTree.planted(a, t))[points]
            rhs = np.array([-rm.kernel.convolve(rm.Pi_x_at(t, i), a[0])[i] for i in points])
            res.add(rel_error(lhs, rhs), str(PlusTree.planted(a, t)))
    return res


def g_two_routes(rm: RenormalizedModel, plus_trees, core) -> Residual:
    """g^R = g^R_inv(S+ .) against g(S+ M_R^+ S+ .)."""
    res = Residual("g_two_routes", 1e-7)
    for p in plus_trees:
        res.add(rel_error(rm.g(p)[core], rm.g_via_antipodes(p)[core]), str(p))
    return res


def g_yx(rm: RenormalizedModel, p: PlusTree, i: int, k: int) -> float:
    """g^R_{yx}(p) = (g^R_x ⊗ (g^R_y)^{-1}) Delta+ p with x = x_i, y = x_k."""
    return float(sum(float(c) * rm.g(p1)[i] * rm.g_inv(p2)[k]
                     for (p1, p2), c in rm.hopf.coproduct_plus(p).items()))


def g_hat(rm: RenormalizedModel, t: Tree, i: int, k: int) -> dict:
    """(Id ⊗ g^R_{yx}) Delta t as {tree: coefficient}."""
    out: dict = {}
    for (s, p), c in rm.hopf.coaction(t).items():
        out[s] = out.get(s, 0.0) + float(c) * g_yx(rm, p, i, k)
    return out


def recursive_pi_defect(rm: RenormalizedModel, a, t: Tree, i: int, k: int) -> float:
    """Relative defect of the recursion for g-hat on I_a(tau)."""
    hopf, x = rm.hopf, rm.grid.x
    lhs = g_hat(rm, t.planted(a), i, k)
    inner = g_hat(rm, t, i, k)
    rhs: dict = {}
    for s, c in inner.items():
        rhs[s.planted(a)] = rhs.get(s.planted(a), 0.0) + c
    dx = x[i] - x[k]
    for l in midx_of_norm_below(t.dim, hopf.planted_degree(a, t)):
        al = midx_add(a, l)
        val = sum(c * rm.Pi_x_point(s.planted(al), i, k) for s, c in inner.items())
        for m in range(l[0] + 1):
            coef = dx ** (l[0] - m) / (midx_factorial((m,)) * midx_factorial((l[0] - m,)))
            key = Tree.monomial((m,))
            rhs[key] = rhs.get(key, 0.0) - coef * val
    keys = set(lhs) | set(rhs)
    diff = max((abs(lhs.get(s, 0.0) - rhs.get(s, 0.0)) for s in keys), default=0.0)
    scale = max((abs(v) for v in list(lhs.values()) + list(rhs.values())), default=0.0)
    return diff / scale if scale > 0 else diff


def recursive_pi(rm: RenormalizedModel, pairs, point_pairs) -> Residual:
    res = Residual("recursive_Pi", 1e-7)
    for a, t in pairs:
        for i, k in point_pairs:
            res.add(recursive_pi_defect(rm, a, t, i, k), f"{t.planted(a)} @ (x{i}, y{k})")
    return res


def base_point(model, pairs, points) -> Residual:
    """Pi_x(I_a tau)(x) = 0 whenever 0 < deg(I_a tau) < 1."""
    res = Residual("Pi_x_vanishes_at_x", 1e-8)
    for a, t in pairs:
        deg = model.hopf.planted_degree(a, t)
        if not 0 < deg < 1:
            continue
        pt = t.planted(a)
        vals = np.array([model.Pi_x_point(pt, i, i) for i in points])
        res.add(float(np.max(np.abs(vals))) / max(scale_of(model.Pi(pt)), 1e-300), str(pt))
    return res


def reconstruction(model, lp, trees, core) -> Residual:
    res = Residual("reconstruction", 1e-12)
    bm = BracketMap(model, lp)
    for t in trees:
        res.add(rel_error(bm.reconstruct(t)[core], model.Pi(t)[core]), str(t))
    return res


# -- brackets -----------------------------------------------------------------
def brackets_vs_M(rm: RenormalizedModel, lp, trees, core, tol: float = 1e-8) -> Residual:
    """Direct [tau]^R against [M_R tau] built from the original brackets."""
    res = Residual("brackets_direct_vs_M", tol)
    direct, base = BracketMap(rm, lp), BracketMap(rm.base, lp)
    for t in trees:
        res.add(rel_error(direct(t)[core], base.lin(rm.ren.M(t))[core]), str(t))
    return res


def brackets_formula(rm: RenormalizedModel, lp, trees, core, tol: float = 1e-6) -> Residual:
    """Direct [tau]^R against the inductive formula route."""
    res = Residual("brackets_formula_vs_direct", tol)
    direct, formula = BracketMap(rm, lp), FormulaBrackets(rm, lp)
    for t in trees:
        res.add(rel_error(direct(t)[core], formula(t)[core]), str(t))
    return res


# -- scaling ------------------------------------------------------------------
@dataclass
class SlopeFit:
    """Fitted regularity exponent r with sup_core |Q_j f| ~ 2^(-j r)."""

    target: str
    degree: float
    exponent: float
    norms: list = field(default_factory=list)
    tol: float = 0.25
    one_sided: bool = False

    @property
    def ok(self) -> bool:
        if not math.isfinite(self.exponent):
            return False
        if self.one_sided:
            return bool(self.exponent >= self.degree - self.tol)
        return bool(abs(self.exponent - self.degree) <= self.tol)

    def to_dict(self) -> dict:
        return {"target": self.target, "degree": self.degree, "exponent": self.exponent,
                "slope": -self.exponent, "norms": self.norms,
                "bound": "one-sided" if self.one_sided else "two-sided", "pass": self.ok}


def fit_exponent(norms, js) -> float:
    if len(js) < 3:
        raise ValueError("insufficient scale range for a slope fit")
    y = np.log2(np.maximum(np.asarray(norms, dtype=float), 1e-300))
    slope = np.polyfit(np.asarray(js, dtype=float), y, 1)[0]
    return float(-slope)


def bracket_scaling(lp: LittlewoodPaley, field_: np.ndarray, core, js) -> list:
    return [float(np.max(np.abs(lp.Q(j, field_)[core]))) for j in js]


def recentred_scaling(model, lp: LittlewoodPaley, t: Tree, core, js) -> list:
    """sup_x |(Q_j Lambda)(x)| for Lambda(y, z) = (Pi_y tau)(z), diagonal blocks."""
    terms = [(b, model.Pi(s)) for s, b in sorted(model.recentred(t).items(), key=lambda kv: kv[0].key)]
    return [float(np.max(np.abs(lp.Qbar_separable(j, terms)[core]))) for j in js]


def scaling_fits(rm: RenormalizedModel, lp, trees, core, js, tol: float = 0.25) -> list:
    fits = []
    brackets = BracketMap(rm, lp)
    for t in trees:
        deg = float(rm.hopf.deg(t))
        n1 = recentred_scaling(rm, lp, t, core, js)
        fits.append(SlopeFit(f"Pi^R_x {t}", deg, fit_exponent(n1, js), n1, tol))
        n2 = bracket_scaling(lp, brackets(t), core, js)
        fits.append(SlopeFit(f"[{t}]^R", deg, fit_exponent(n2, js), n2, tol))
    return fits


def ghat_scaling(rm: RenormalizedModel, sigma: Tree, i: int, steps) -> list:
    """Fit |(g-hat_{yx} sigma)_b| against |y - x|^(deg(sigma) - b), y = x + 2^(-m) L.

    One fit per degree b < deg(sigma) present in the expansion; returns SlopeFits
    whose ``exponent`` is the fitted power of |y - x|.
    """
    grid = rm.grid
    hopf = rm.hopf
    deg = hopf.deg(sigma)
    rows: dict = {}
    dists = []
    for m in steps:
        k = i + (grid.n >> m)
        dists.append(abs(grid.x[k] - grid.x[i]))
        by_degree: dict = {}
        for s, c in g_hat(rm, sigma, i, k).items():
            b = hopf.deg(s)
            if b < deg:
                by_degree[b] = by_degree.get(b, 0.0) + abs(c)
        for b, v in by_degree.items():
            rows.setdefault(b, {})[m] = v
    fits = []
    logd = np.log2(dists)
    for b in sorted(rows):
        vals = [rows[b].get(m, 0.0) for m in steps]
        y = np.log2(np.maximum(vals, 1e-300))
        power = float(np.polyfit(logd, y, 1)[0])
        fits.append(SlopeFit(f"g-hat {sigma} @ deg {b}", float(deg - b), power, vals))
    return fits


# -- full run -----------------------------------------------------------------
@dataclass
class LabConfig:
    J: int = 12
    scaling_J: int = 15
    seed: int = 42
    samples: int = 6
    pairs: int = 3
    js: tuple = (3, 4, 5, 6, 7, 8)


def build_models(spec, R: PreparationMap, J: int, seed: int):
    grid = Grid(J)
    noise = make_noise(grid, float(spec.alpha), seed)
    model = canonical_model(spec, grid, noise)
    return grid, LittlewoodPaley(grid), model, renormalized_model(model, R)


def identity_checks(spec, basis: Basis, R: PreparationMap, cfg: LabConfig) -> list:
    grid, lp, model, rm = build_models(spec, R, cfg.J, cfg.seed)
    core = grid.core
    pts = grid.sample_points(cfg.samples)
    pair_pts = [(int(pts[i]), int(pts[-1 - i])) for i in range(cfg.pairs)]
    pairs = planted_pairs(basis)
    neg = basis.negative_trees()
    return [
        admissibility(model, pairs, core, "admissibility"),
        admissibility(rm, pairs, core, "admissibility_R"),
        base_point(model, pairs, pts),
        pi_mx(rm, basis.trees, pts, core),
        g_inv_formula(rm, pairs, pts),
        g_two_routes(rm, basis.plus_trees, core),
        recursive_pi(rm, pairs, pair_pts),
        reconstruction(model, lp, basis.trees, core),
        reconstruction(rm, lp, neg, core),
        brackets_formula(rm, lp, neg, core),
    ]


def scaling_targets(spec, basis: Basis) -> tuple:
    """(sharp, other): trees whose degree is the sharp block exponent, and the rest.

    Sharp targets are the first-chaos trees Xi and I_a(Xi) with degree below 1.
    For products and polynomial decorations deg is only an upper bound
    (e.g. [X Xi] = (x - P_x) xi is smooth inside the box), so those are
    reported against the one-sided bound exponent >= deg - tol.
    """
    hopf = spec.hopf()
    xi = Tree.xi(spec.d)
    sharp = [xi] + [xi.planted(a) for a in spec.kernel_indices()
                    if hopf.planted_degree(a, xi) < 1]
    other = [t for t in basis.negative_trees() if t not in sharp]
    return sharp, other


def scaling_checks(spec, basis: Basis, R: PreparationMap, cfg: LabConfig) -> tuple:
    grid, lp, _, rm = build_models(spec, R, cfg.scaling_J, cfg.seed)
    sharp, other = scaling_targets(spec, basis)
    fits = scaling_fits(rm, lp, sharp, grid.core, list(cfg.js))
    bounds = scaling_fits(rm, lp, other, grid.core, list(cfg.js))
    for f in bounds:
        f.one_sided = True
    return fits, bounds


def lab_report(spec, basis: Basis, R: PreparationMap, cfg: LabConfig | None = None,
               scaling: bool = True) -> dict:
    cfg = cfg or LabConfig()
    checks = identity_checks(spec, basis, R, cfg)
    fits, bounds = scaling_checks(spec, basis, R, cfg) if scaling else ([], [])
    ok = all(c.ok for c in checks) and all(f.ok for f in fits + bounds)
    return {
        "spec": spec.name,
        "preparation": R.name,
        "seed": cfg.seed,
        "grid": Grid(cfg.J).metadata(),
        "scaling_grid": Grid(cfg.scaling_J).metadata() if scaling else None,
        "checks": [c.to_dict() for c in checks],
        "scaling": [f.to_dict() for f in fits],
        "scaling_bounds": [f.to_dict() for f in bounds],
        "pass": ok,
    }


def _fmt(obj):
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float):
        return FLOAT_FORMAT.format(obj)
    if isinstance(obj, dict):
        return {k: _fmt(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_fmt(v) for v in obj]
    return obj


def dumps_report(report: dict) -> str:
    """Deterministic JSON: sorted keys and fixed-precision floats."""
    return json.dumps(_fmt(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
