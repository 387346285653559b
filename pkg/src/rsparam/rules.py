"""Equation specs, node-shape rules and finite bases of T and T+."""
from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .algebra import LinComb
from .hopf import HopfStructure
from .trees import KERNEL, NOISE, PlusTree, Tree, _midx_of_norm, midx_zero


class SpecError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class NodeShape:
    """Largest admissible node: at most ``noise`` noises and the kernel
    edges in ``kernels`` (a multiset of derivative indices); ``poly`` allows
    a polynomial decoration at such a node.  Sub-shapes are admissible too.
    """

    noise: int
    kernels: tuple
    poly: bool = True

    def admits(self, noises: int, kernels: Counter, has_poly: bool) -> bool:
        if noises > self.noise or (has_poly and not self.poly):
            return False
        allowed = Counter(self.kernels)
        return all(allowed[a] >= n for a, n in kernels.items())


@dataclass(frozen=True)
class EquationSpec:
    alpha: Fraction
    beta: Fraction
    d: int
    rules: tuple
    degree_cutoff: Fraction
    noise_cutoff: int
    name: str = "spec"
    extract_bare_noise: bool = False

    def __post_init__(self):
        if self.alpha >= 0:
            raise SpecError("alpha must be negative")
        if self.beta <= 0:
            raise SpecError("beta must be positive")
        if self.d < 1:
            raise SpecError("d must be positive")
        if self.noise_cutoff < 0:
            raise SpecError("noise_cutoff must be non-negative")
        for shape in self.rules:
            for a in shape.kernels:
                if len(a) != self.d:
                    raise SpecError(f"kernel index {a} has wrong dimension")
                if self.beta - sum(a) <= 0:
                    raise SpecError(f"kernel edge {a} does not gain regularity")

    @classmethod
    def from_dict(cls, obj: dict) -> "EquationSpec":
        d = int(obj.get("d", 1))
        rules = tuple(
            NodeShape(int(r.get("noise", 0)),
                      tuple(sorted(tuple(int(x) for x in a) for a in r.get("kernels", []))),
                      bool(r.get("poly", True)))
            for r in obj.get("rules", []))
        return cls(alpha=Fraction(obj["alpha"]), beta=Fraction(obj["beta"]), d=d, rules=rules,
                   degree_cutoff=Fraction(obj["degree_cutoff"]),
                   noise_cutoff=int(obj["noise_cutoff"]), name=obj.get("name", "spec"),
                   extract_bare_noise=bool(obj.get("extract_bare_noise", False)))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "alpha": str(self.alpha),
            "beta": str(self.beta),
            "d": self.d,
            "rules": [{"noise": r.noise, "kernels": [list(a) for a in r.kernels], "poly": r.poly}
                      for r in self.rules],
            "degree_cutoff": str(self.degree_cutoff),
            "noise_cutoff": self.noise_cutoff,
            "extract_bare_noise": self.extract_bare_noise,
        }

    def hopf(self) -> HopfStructure:
        return HopfStructure(self.alpha, self.beta, self.d)

    def deg(self, t) -> Fraction:
        return t.formal_degree.evaluate(self.alpha, self.beta)

    def node_admissible(self, noises: int, kernels: Counter, has_poly: bool) -> bool:
        if noises == 0 and not kernels:
            return True
        return any(shape.admits(noises, kernels, has_poly) for shape in self.rules)

    def conforms(self, t: Tree) -> bool:
        """Every node of t matches some rule shape (extended decorations are inert)."""
        kernels = Counter(edge[1] for edge, _ in t.children if edge[0] == KERNEL)
        if not self.node_admissible(t.noise_at_root(), kernels, any(t.poly)):
            return False
        return all(self.conforms(child) for edge, child in t.children if edge[0] == KERNEL)

    def kernel_indices(self) -> list:
        return sorted({a for shape in self.rules for a in shape.kernels})


def load_spec(path) -> EquationSpec:
    with open(path, encoding="utf-8") as fh:
        return EquationSpec.from_dict(json.load(fh))


SHIPPED_SPECS = ("kpz", "pam", "phi4")


def shipped_spec(name: str) -> EquationSpec:
    text = resources.files("rsparam.specs").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return EquationSpec.from_dict(json.loads(text))


def resolve_spec(name_or_path) -> EquationSpec:
    if name_or_path in SHIPPED_SPECS:
        return shipped_spec(name_or_path)
    return load_spec(Path(name_or_path))


@dataclass
class Basis:
    spec: EquationSpec
    trees: list
    plus_trees: list
    iterations: int = 0
    history: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.trees)

    def negative_trees(self) -> list:
        return [t for t in self.trees if self.spec.deg(t) < 0]

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "trees": [{"tree": t.key, "degree": str(self.spec.deg(t)), "noises": t.noises}
                      for t in self.trees],
            "plus_trees": [{"tree": p.key, "degree": str(self.spec.deg(p))} for p in self.plus_trees],
        }


def _sort_key(spec: EquationSpec):
    return lambda t: (spec.deg(t), t.key)


def _poly_choices(d: int, budget: Fraction):
    out = []
    n = 0
    while n <= budget:
        out.extend(_midx_of_norm(d, n))
        n += 1
    return out


def generate_basis(spec: EquationSpec, max_iterations: int = 64) -> Basis:
    """All rule-conforming trees within the degree and noise cutoffs.

    Fixed-point iteration on root assembly.  A proper subtree carrying n
    noises is kept only if its degree plus the smallest possible degree of a
    surrounding context stays within the cutoff.  A context with m noises
    has at least one kernel edge and at least m / max_noise of them, each
    contributing at least beta - max|a|.
    """
    d = spec.d
    N = spec.noise_cutoff
    alpha = spec.alpha

    gain = min((spec.beta - sum(a) for a in spec.kernel_indices()), default=spec.beta)
    max_noise = max((shape.noise for shape in spec.rules), default=0)

    def context_floor(m: int) -> Fraction:
        # a context holding m noises has k >= max(1, m / max_noise) kernel edges
        k = max(1, -(-m // max_noise)) if max_noise else 1
        return m * alpha + k * gain

    def budget(n: int) -> Fraction:
        """Largest degree of a proper subtree with n noises inside a basis tree."""
        floor = min(context_floor(m) for m in range(0, N - n + 1))
        return spec.degree_cutoff - floor

    found: dict = {}
    history = []
    shapes = list(spec.rules) or []
    frontier_changed = True
    iterations = 0
    while frontier_changed:
        iterations += 1
        if iterations > max_iterations:
            raise GenerationError("basis generation did not reach a fixed point; "
                                  "the equation is likely not subcritical")
        current = list(found)
        planted = {}
        for a in spec.kernel_indices():
            # K acting on a polynomial is not a separate symbol
            planted[a] = [t.planted(a) for t in current
                          if t.noises and spec.deg(t) <= budget(t.noises)]
        new = set()
        # polynomials and root assemblies
        for k in _poly_choices(d, max(budget(0), spec.degree_cutoff)):
            new.add(Tree.monomial(k))
        for shape in shapes:
            for m in range(0, min(shape.noise, N) + 1):
                kcount = Counter(shape.kernels)
                slots = []
                for a, mult in sorted(kcount.items()):
                    slots.append([(a, r) for r in range(mult + 1)])
                for choice in itertools.product(*slots):
                    groups = []
                    for a, r in choice:
                        if r:
                            groups.append(list(itertools.combinations_with_replacement(planted[a], r)))
                    for combo in itertools.product(*groups):
                        kids = [p for grp in combo for p in grp]
                        noises = m + sum(p.noises for p in kids)
                        if noises > N:
                            continue
                        base = Tree(midx_zero(d),
                                    children=[((NOISE,), Tree.one(d))] * m
                                    + [c for p in kids for c in p.children])
                        if base.is_unit():
                            continue
                        bdeg = spec.deg(base)
                        limit = max(budget(noises), spec.degree_cutoff)
                        if bdeg > limit:
                            continue
                        polys = _poly_choices(d, limit - bdeg) if shape.poly else [midx_zero(d)]
                        for k in polys:
                            t = base.with_root(poly=k)
                            if spec.deg(t) <= limit:
                                new.add(t)
        added = [t for t in new if t not in found]
        for t in added:
            found[t] = True
        history.append({"iteration": iterations, "new": len(added),
                        "max_noises": max((t.noises for t in added), default=0)})
        frontier_changed = bool(added)
    trees = [t for t in found if spec.deg(t) <= spec.degree_cutoff and t.noises <= N
             and spec.conforms(t)]
    hopf = spec.hopf()
    trees = _tree_closure(hopf, trees)
    trees.sort(key=_sort_key(spec))
    plus = _plus_closure(hopf, trees)
    plus.sort(key=_sort_key(spec))
    return Basis(spec, trees, plus, iterations, history)


def _tree_closure(hopf: HopfStructure, trees) -> list:
    """Add the left factors of Delta, e.g. Xi I(1) from Xi I(I(Xi))."""
    out = dict.fromkeys(trees)
    todo = list(trees)
    while todo:
        t = todo.pop()
        for (s, _p), _c in hopf.coaction(t).items():
            if s not in out:
                out[s] = None
                todo.append(s)
    return list(out)


def _plus_closure(hopf: HopfStructure, trees) -> list:
    seen = {}
    queue = []
    for t in trees:
        for (_, p), _c in hopf.coaction(t).items():
            if p not in seen:
                seen[p] = True
                queue.append(p)
    while queue:
        p = queue.pop()
        for (p1, p2), _c in hopf.coproduct_plus(p).items():
            for q in (p1, p2):
                if q not in seen:
                    seen[q] = True
                    queue.append(q)
    return list(seen)


def subcriticality_check(basis: Basis) -> dict:
    """Per-degree dimensions of the basis plus generation diagnostics."""
    spec = basis.spec
    dims: dict = {}
    for t in basis.trees:
        key = str(spec.deg(t))
        dims[key] = dims.get(key, 0) + 1
    noise_profile: dict = {}
    for t in basis.trees:
        noise_profile[t.noises] = noise_profile.get(t.noises, 0) + 1
    return {
        "spec": spec.name,
        "size": len(basis.trees),
        "plus_size": len(basis.plus_trees),
        "dimensions": dict(sorted(dims.items(), key=lambda kv: Fraction(kv[0]))),
        "noise_profile": dict(sorted(noise_profile.items())),
        "iterations": basis.iterations,
        "history": basis.history,
        "finite": True,
        # trees at the noise cutoff mean the cutoff, not the degree, ends the basis
        "noise_cutoff_binding": noise_profile.get(spec.noise_cutoff, 0) > 0,
    }


def closure_check(basis: Basis, hopf: HopfStructure | None = None) -> tuple:
    """Check all tensor factors of Delta / Delta+ lie in the basis.

    Returns ``(ok, escapes)`` where escapes lists (element, factor) pairs.
    """
    hopf = hopf or basis.spec.hopf()
    trees = set(basis.trees)
    plus = set(basis.plus_trees)
    escapes = []
    for t in basis.trees:
        for (s, p), _c in hopf.coaction(t).items():
            if s not in trees:
                escapes.append((t.key, s.key))
            if p not in plus:
                escapes.append((t.key, p.key))
    for p in basis.plus_trees:
        for (p1, p2), _c in hopf.coproduct_plus(p).items():
            for q in (p1, p2):
                if q not in plus:
                    escapes.append((p.key, q.key))
    return (not escapes, escapes)


def basis_from_trees(spec: EquationSpec, trees) -> Basis:
    """A basis made of the given trees; the plus part is the closure of their coaction."""
    trees = sorted(set(trees), key=_sort_key(spec))
    hopf = spec.hopf()
    plus = sorted(_plus_closure(hopf, trees), key=_sort_key(spec))
    return Basis(spec, trees, plus)


__all__ = ["NodeShape", "EquationSpec", "Basis", "generate_basis", "subcriticality_check",
           "closure_check", "load_spec", "shipped_spec", "resolve_spec", "basis_from_trees",
           "LinComb"]
