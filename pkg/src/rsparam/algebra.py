"""Exact formal linear combinations over tree bases and tensor products thereof."""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Callable, Iterable

from .trees import PlusTree, Tree, basis_product, basis_text, parse_basis, midx_zero


def _coef(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("floating point coefficients are not allowed in exact combinations")
    return Fraction(c)


class LinComb:
    """Finite linear combination sum_i c_i b_i with exact rational c_i.

    Basis elements are canonical Trees, PlusTrees or tuples of them (tensors).
    Zero coefficients are never stored.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for b, c in items:
                self._acc(b, _coef(c))

    def _acc(self, b, c: Fraction):
        if not c:
            return
        v = self.terms.get(b, 0) + c
        if v:
            self.terms[b] = v
        else:
            del self.terms[b]

    @classmethod
    def of(cls, b, c=1) -> "LinComb":
        out = cls()
        out._acc(b, _coef(c))
        return out

    @classmethod
    def zero(cls) -> "LinComb":
        return cls()

    @classmethod
    def sum(cls, parts: Iterable["LinComb"]) -> "LinComb":
        out = cls()
        for p in parts:
            out.iadd(p)
        return out

    def iadd(self, other: "LinComb", scale=1) -> "LinComb":
        s = _coef(scale)
        if not s:
            return self
        for b, c in other.terms.items():
            self._acc(b, c * s)
        return self

    def copy(self) -> "LinComb":
        out = LinComb()
        out.terms = dict(self.terms)
        return out

    def __add__(self, other: "LinComb") -> "LinComb":
        return self.copy().iadd(other)

    def __sub__(self, other: "LinComb") -> "LinComb":
        return self.copy().iadd(other, -1)

    def __neg__(self) -> "LinComb":
        return self.scale(-1)

    def scale(self, c) -> "LinComb":
        c = _coef(c)
        out = LinComb()
        if c:
            out.terms = {b: v * c for b, v in self.terms.items()}
        return out

    def __rmul__(self, c) -> "LinComb":
        return self.scale(c)

    def __mul__(self, other):
        if isinstance(other, LinComb):
            out = LinComb()
            for b1, c1 in self.terms.items():
                for b2, c2 in other.terms.items():
                    out._acc(basis_product(b1, b2), c1 * c2)
            return out
        return self.scale(other)

    def __eq__(self, other) -> bool:
        return isinstance(other, LinComb) and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def items(self):
        return self.terms.items()

    def coefficient(self, b) -> Fraction:
        return self.terms.get(b, Fraction(0))

    def basis(self) -> list:
        return list(self.terms)

    def map(self, f: Callable) -> "LinComb":
        """Apply a basis map f: b -> LinComb linearly."""
        out = LinComb()
        for b, c in self.terms.items():
            out.iadd(f(b), c)
        return out

    def sorted_items(self) -> list:
        return sorted(self.terms.items(), key=lambda kv: basis_text(kv[0]))

    def __repr__(self) -> str:
        return f"LinComb({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*[{basis_text(b)}]" for b, c in self.sorted_items())

    # -- serialization ------------------------------------------------
    def to_json_obj(self) -> dict:
        return {"terms": [{"coef": str(c), "basis": basis_text(b)} for b, c in self.sorted_items()]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), ensure_ascii=False)

    @classmethod
    def from_json_obj(cls, obj: dict, kinds=None, d: int | None = None) -> "LinComb":
        """Inverse of to_json_obj; ``kinds`` is a tuple of 'T'/'P' per tensor slot."""
        out = cls()
        for term in obj["terms"]:
            b = parse_basis(term["basis"], d)
            if kinds is not None:
                b = _coerce(b, kinds)
            out._acc(b, Fraction(term["coef"]))
        return out


def _coerce(b, kinds):
    if len(kinds) == 1:
        return _coerce_one(b, kinds[0])
    return tuple(_coerce_one(x, k) for x, k in zip(b, kinds))


def _coerce_one(x, kind):
    if kind == "P" and isinstance(x, Tree):
        if not x.is_polynomial():
            raise ValueError(f"{x.key} is not a positive tree")
        return PlusTree(x.poly)
    return x


def tensor(u: LinComb, v: LinComb) -> LinComb:
    """Tensor product; tensor factors are flattened into tuples."""
    out = LinComb()
    for b1, c1 in u.terms.items():
        t1 = b1 if isinstance(b1, tuple) else (b1,)
        for b2, c2 in v.terms.items():
            t2 = b2 if isinstance(b2, tuple) else (b2,)
            out._acc(t1 + t2, c1 * c2)
    return out


def counit(u: LinComb) -> Fraction:
    """Coefficient of the unit (of 1, or of 1 ⊗ ... ⊗ 1 on tensors)."""
    total = Fraction(0)
    for b, c in u.terms.items():
        parts = b if isinstance(b, tuple) else (b,)
        if all(p.is_unit() for p in parts):
            total += c
    return total


def m_plus(u: LinComb) -> LinComb:
    """Multiply the two tensor factors of a combination in T+ ⊗ T+."""
    out = LinComb()
    for (p, q), c in u.terms.items():
        out._acc(p * q, c)
    return out


def apply_slot(u: LinComb, slot: int, f: Callable) -> LinComb:
    """Apply a linear map (given on basis elements) to one tensor slot."""
    out = LinComb()
    for b, c in u.terms.items():
        img = f(b[slot])
        for x, cx in img.terms.items():
            xs = x if isinstance(x, tuple) else (x,)
            out._acc(b[:slot] + xs + b[slot + 1:], c * cx)
    return out


def lift_linear(f: Callable) -> Callable:
    """Extend a basis map to linear combinations."""
    def lifted(u: LinComb) -> LinComb:
        return u.map(f)
    return lifted


def power(x: LinComb, n: int, unit: LinComb) -> LinComb:
    out = unit
    for _ in range(n):
        out = out * x
    return out


def lift_multiplicative(on_planted: Callable, on_poly: Callable, on_noise: Callable,
                        on_ext: Callable, unit: Callable) -> Callable:
    """Multiplicative extension over tau = X^k o[e] Xi^m prod I_a(tau_i).

    ``on_poly(i)`` is the image of X_i, ``on_noise()`` of Xi, ``on_ext(e)`` of
    the bare extended node, ``on_planted(a, tau)`` of I_a(tau), ``unit(d)`` the
    unit of the target.
    """
    def lifted(t: Tree) -> LinComb:
        d = t.dim
        out = unit(d)
        for i, k in enumerate(t.poly):
            if k:
                out = out * power(on_poly(i, d), k, unit(d))
        if not t.ext.is_zero():
            out = out * on_ext(t.ext, d)
        for edge, child in t.children:
            if edge[0] == "Xi":
                out = out * on_noise(d)
            else:
                out = out * on_planted(edge[1], child)
        return out
    return lifted


def lift_multiplicative_plus(on_planted: Callable, on_poly: Callable, unit: Callable) -> Callable:
    """Multiplicative extension over sigma = X^k prod I+_a(tau_i)."""
    def lifted(p: PlusTree) -> LinComb:
        d = p.dim
        out = unit(d)
        for i, k in enumerate(p.poly):
            if k:
                out = out * power(on_poly(i, d), k, unit(d))
        for a, arg in p.factors:
            out = out * on_planted(a, arg)
        return out
    return lifted


def tree_unit(d: int) -> LinComb:
    return LinComb.of(Tree.one(d))


def plus_unit(d: int) -> LinComb:
    return LinComb.of(PlusTree.one(d))


def plus_monomial(k) -> PlusTree:
    return PlusTree(tuple(k))


def one_tensor(d: int, kinds: str) -> tuple:
    return tuple(Tree.one(d) if k == "T" else PlusTree(midx_zero(d)) for k in kinds)
