"""Decorated rooted trees, planted products for the positive algebra, degrees
and the textual grammar used by the CLI and the JSON formats.

Trees are immutable and canonical: children are kept sorted by
``(edge kind, kernel multi-index, canonical text of the child)``, so that
structural equality coincides with isomorphism of non-planar trees.  The
canonical text doubles as hash key.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

MultiIndex = tuple

NOISE = "Xi"
KERNEL = "I"


class TreeError(ValueError):
    """Raised on malformed trees or dimension mismatches."""


class ParseError(TreeError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text[:pos]}<<HERE>>{text[pos:]}")
        self.pos = pos
        self.text = text


def midx_norm(k: Sequence[int]) -> int:
    return sum(k)


def midx_add(k: Sequence[int], m: Sequence[int]) -> MultiIndex:
    if len(k) != len(m):
        raise TreeError(f"dimension mismatch: {k} vs {m}")
    return tuple(a + b for a, b in zip(k, m))


def midx_zero(d: int) -> MultiIndex:
    return (0,) * d


def unit_midx(d: int, i: int) -> MultiIndex:
    return tuple(1 if j == i else 0 for j in range(d))


def midx_below(k: Sequence[int]):
    """All multi-indices j <= k componentwise."""
    if not k:
        yield ()
        return
    for head in range(k[0] + 1):
        for rest in midx_below(k[1:]):
            yield (head,) + rest


def midx_of_norm_below(d: int, bound) -> list:
    """All multi-indices of dimension d with |l| < bound (bound may be rational)."""
    out = []
    top = 0
    while top < bound:
        out.extend(_midx_of_norm(d, top))
        top += 1
    return out


def _midx_of_norm(d: int, n: int):
    if d == 1:
        yield (n,)
        return
    for head in range(n, -1, -1):
        for rest in _midx_of_norm(d - 1, n - head):
            yield (head,) + rest


def midx_factorial(k: Sequence[int]) -> int:
    out = 1
    for x in k:
        for i in range(2, x + 1):
            out *= i
    return out


def _fmt_midx(k: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in k) + ")"


@dataclass(frozen=True, order=True)
class Degree:
    """Formal degree a*alpha + b*beta + c with integer coefficients."""

    a: int = 0
    b: int = 0
    c: int = 0

    def __add__(self, other: "Degree") -> "Degree":
        return Degree(self.a + other.a, self.b + other.b, self.c + other.c)

    def __sub__(self, other: "Degree") -> "Degree":
        return Degree(self.a - other.a, self.b - other.b, self.c - other.c)

    def __neg__(self) -> "Degree":
        return Degree(-self.a, -self.b, -self.c)

    def shift(self, c: int) -> "Degree":
        return Degree(self.a, self.b, self.c + c)

    def evaluate(self, alpha, beta) -> Fraction:
        return self.a * Fraction(alpha) + self.b * Fraction(beta) + self.c

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0

    def __str__(self) -> str:
        return f"{self.a}a{self.b:+d}b{self.c:+d}"


ZERO_DEGREE = Degree()


class Tree:
    """Canonical decorated tree.

    ``poly`` is the root polynomial decoration, ``ext`` the root extended
    decoration, ``children`` a sorted tuple of ``(edge, child)`` where an
    edge is ``("Xi",)`` or ``("I", a)``.  Noise children are empty leaves.
    """

    __slots__ = ("poly", "ext", "children", "key", "_hash", "formal_degree", "noises", "size")

    def __init__(self, poly: MultiIndex, ext: Degree = ZERO_DEGREE, children: Iterable = ()):
        poly = tuple(poly)
        d = len(poly)
        kids = []
        for edge, child in children:
            if len(child.poly) != d:
                raise TreeError("dimension mismatch between node decorations")
            if edge[0] == NOISE:
                if not child.is_unit():
                    raise TreeError("noise edges must end in an undecorated leaf")
                edge = (NOISE,)
            elif edge[0] == KERNEL:
                a = tuple(edge[1])
                if len(a) != d:
                    raise TreeError("dimension mismatch in kernel multi-index")
                edge = (KERNEL, a)
            else:
                raise TreeError(f"unknown edge {edge!r}")
            kids.append((edge, child))
        kids.sort(key=_child_sort_key)
        self.poly = poly
        self.ext = ext
        self.children = tuple(kids)
        self.key = self._render()
        self._hash = hash(self.key)
        deg = Degree(c=sum(poly)) + ext
        noises = 0
        size = 1
        for edge, child in self.children:
            if edge[0] == NOISE:
                deg = deg + Degree(a=1)
                noises += 1
            else:
                deg = deg + child.formal_degree + Degree(b=1, c=-sum(edge[1]))
                noises += child.noises
            size += child.size
        self.formal_degree = deg
        self.noises = noises
        self.size = size

    # -- constructors -------------------------------------------------
    @staticmethod
    def one(d: int = 1) -> "Tree":
        return Tree(midx_zero(d))

    @staticmethod
    def xi(d: int = 1) -> "Tree":
        return Tree(midx_zero(d), children=[((NOISE,), Tree.one(d))])

    @staticmethod
    def monomial(k: Sequence[int]) -> "Tree":
        return Tree(tuple(k))

    @staticmethod
    def ext_node(ext: Degree, d: int = 1) -> "Tree":
        return Tree(midx_zero(d), ext)

    def planted(self, a: Sequence[int]) -> "Tree":
        """The tree I_a(self)."""
        return Tree(midx_zero(self.dim), children=[((KERNEL, tuple(a)), self)])

    # -- structure ----------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.poly)

    def is_unit(self) -> bool:
        return not self.children and not any(self.poly) and self.ext.is_zero()

    def is_polynomial(self) -> bool:
        return not self.children and self.ext.is_zero()

    def is_planted(self) -> bool:
        return (len(self.children) == 1 and self.children[0][0][0] == KERNEL
                and not any(self.poly) and self.ext.is_zero())

    def planted_factors(self) -> list:
        """List of (a, child) for the kernel edges at the root."""
        return [(edge[1], child) for edge, child in self.children if edge[0] == KERNEL]

    def noise_at_root(self) -> int:
        return sum(1 for edge, _ in self.children if edge[0] == NOISE)

    def with_root(self, poly=None, ext=None, children=None) -> "Tree":
        return Tree(self.poly if poly is None else poly,
                    self.ext if ext is None else ext,
                    self.children if children is None else children)

    def degree(self, alpha, beta) -> Fraction:
        return self.formal_degree.evaluate(alpha, beta)

    # -- protocol -----------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, Tree) and self.key == other.key

    def __hash__(self) -> int:
        return self._hash

    def __mul__(self, other: "Tree") -> "Tree":
        return tree_product(self, other)

    def __repr__(self) -> str:
        return f"Tree({self.key!r})"

    def __str__(self) -> str:
        return self.key

    def _render(self) -> str:
        parts = []
        if any(self.poly):
            parts.append("X^" + _fmt_midx(self.poly))
        if not self.ext.is_zero():
            parts.append(f"o[{self.ext.a},{self.ext.b},{self.ext.c}]")
        for edge, child in self.children:
            if edge[0] == NOISE:
                parts.append("Xi")
            else:
                parts.append("I_" + _fmt_midx(edge[1]) + "[" + child.key + "]")
        return " ".join(parts) if parts else "1"


def _child_sort_key(item):
    edge, child = item
    if edge[0] == NOISE:
        return (0, (), "")
    return (1, edge[1], child.key)


def tree_product(t1: Tree, t2: Tree) -> Tree:
    """Identify the roots of t1 and t2; root decorations add."""
    if t1.dim != t2.dim:
        raise TreeError(f"dimension mismatch: {t1.dim} vs {t2.dim}")
    return Tree(midx_add(t1.poly, t2.poly), t1.ext + t2.ext, t1.children + t2.children)


def canonicalize(poly, ext=ZERO_DEGREE, children=()) -> Tree:
    """Build a canonical tree from raw (possibly unsorted, nested raw) data.

    ``children`` items are ``(edge, child)`` where child is a Tree or a raw
    ``(poly, ext, children)`` triple.
    """
    kids = []
    for edge, child in children:
        if not isinstance(child, Tree):
            child = canonicalize(*child)
        kids.append((edge, child))
    return Tree(poly, ext, kids)


def degree(t, alpha, beta) -> Fraction:
    return t.degree(alpha, beta)


def noise_count(t: Tree) -> int:
    return t.noises


class PlusTree:
    """Basis element X^k prod_i I+_{a_i}(tau_i) of the positive algebra."""

    __slots__ = ("poly", "factors", "key", "_hash", "formal_degree", "noises", "size")

    def __init__(self, poly: MultiIndex, factors: Iterable = ()):
        poly = tuple(poly)
        facs = []
        for a, arg in factors:
            a = tuple(a)
            if len(a) != len(poly) or arg.dim != len(poly):
                raise TreeError("dimension mismatch in positive tree")
            facs.append((a, arg))
        facs.sort(key=lambda f: (f[0], f[1].key))
        self.poly = poly
        self.factors = tuple(facs)
        parts = []
        if any(poly):
            parts.append("X^" + _fmt_midx(poly))
        for a, arg in self.factors:
            parts.append("I+_" + _fmt_midx(a) + "[" + arg.key + "]")
        self.key = " ".join(parts) if parts else "1"
        self._hash = hash(("+", self.key))
        deg = Degree(c=sum(poly))
        for a, arg in self.factors:
            deg = deg + arg.formal_degree + Degree(b=1, c=-sum(a))
        self.formal_degree = deg
        self.noises = sum(arg.noises for _, arg in self.factors)
        self.size = sum(arg.size for _, arg in self.factors) + len(self.factors)

    @staticmethod
    def one(d: int = 1) -> "PlusTree":
        return PlusTree(midx_zero(d))

    @staticmethod
    def monomial(k) -> "PlusTree":
        return PlusTree(tuple(k))

    @staticmethod
    def planted(a, arg: Tree) -> "PlusTree":
        return PlusTree(midx_zero(arg.dim), [(tuple(a), arg)])

    @property
    def dim(self) -> int:
        return len(self.poly)

    def is_unit(self) -> bool:
        return not self.factors and not any(self.poly)

    def degree(self, alpha, beta) -> Fraction:
        return self.formal_degree.evaluate(alpha, beta)

    def __eq__(self, other) -> bool:
        return isinstance(other, PlusTree) and self.key == other.key

    def __hash__(self) -> int:
        return self._hash

    def __mul__(self, other: "PlusTree") -> "PlusTree":
        return plus_product(self, other)

    def __repr__(self) -> str:
        return f"PlusTree({self.key!r})"

    def __str__(self) -> str:
        return self.key


def plus_product(p: PlusTree, q: PlusTree) -> PlusTree:
    return PlusTree(midx_add(p.poly, q.poly), p.factors + q.factors)


def plus_degree(p: PlusTree, alpha, beta) -> Fraction:
    return p.degree(alpha, beta)


def is_positive_planted(a, arg: Tree, alpha, beta) -> bool:
    return arg.degree(alpha, beta) + Fraction(beta) - sum(a) > 0


def check_plus_tree(p: PlusTree, alpha, beta) -> None:
    """Raise unless every planted factor of p has positive degree."""
    for a, arg in p.factors:
        if not is_positive_planted(a, arg, alpha, beta):
            raise TreeError(f"branch I+_{a}[{arg.key}] of {p.key} has non-positive degree")


Basis = Union[Tree, PlusTree, tuple]


def basis_product(x, y):
    """Product of two basis elements of the same kind (componentwise on tensors)."""
    if isinstance(x, Tree):
        return tree_product(x, y)
    if isinstance(x, PlusTree):
        return plus_product(x, y)
    if isinstance(x, tuple):
        if len(x) != len(y):
            raise TreeError("tensor rank mismatch")
        return tuple(basis_product(a, b) for a, b in zip(x, y))
    raise TypeError(f"not a basis element: {x!r}")


def basis_text(x) -> str:
    if isinstance(x, tuple):
        return " ⊗ ".join(basis_text(c) for c in x)
    return x.key


# -- grammar --------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, d: int | None):
        self.text = text
        self.pos = 0
        self.d = d

    def error(self, msg: str):
        raise ParseError(msg, self.text, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        if not self.peek(s):
            self.error(f"expected {s!r}")
        self.pos += len(s)

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.peek("-") or self.peek("+"):
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos or not self.text[start:self.pos].lstrip("+-"):
            self.pos = start
            self.error("expected integer")
        return int(self.text[start:self.pos])

    def midx(self) -> MultiIndex:
        self.expect("(")
        vals = [self.integer()]
        self.skip_ws()
        while self.peek(","):
            self.pos += 1
            vals.append(self.integer())
            self.skip_ws()
        self.expect(")")
        if any(v < 0 for v in vals):
            self.error("negative multi-index entry")
        if self.d is None:
            self.d = len(vals)
        elif len(vals) != self.d:
            self.error(f"multi-index of dimension {len(vals)} where {self.d} expected")
        return tuple(vals)

    def dim(self) -> int:
        if self.d is None:
            self.d = 1
        return self.d

    def term(self, plus_ok: bool, stop: str | None):
        """Parse juxtaposed factors; returns (poly, ext, children, plus_factors)."""
        factors = []
        while True:
            self.skip_ws()
            if self.pos >= len(self.text) or (stop and self.peek(stop)):
                break
            factors.append(self.factor(plus_ok))
        if not factors:
            self.error("empty term")
        return factors

    def factor(self, plus_ok: bool):
        if self.peek("Xi"):
            self.pos += 2
            return ("xi", None)
        if self.peek("X"):
            self.pos += 1
            if self.peek("^"):
                self.pos += 1
                return ("poly", self.midx())
            d = self.dim()
            if d != 1:
                self.error("bare X is only allowed in dimension 1")
            return ("poly", (1,))
        if self.peek("I+"):
            if not plus_ok:
                self.error("I+ only allowed at the root of a positive tree")
            self.pos += 2
            a = self._edge_index()
            self.expect("[")
            arg = self.tree_until("]")
            self.expect("]")
            return ("plus", (a, arg))
        if self.peek("I"):
            self.pos += 1
            a = self._edge_index()
            self.expect("[")
            arg = self.tree_until("]")
            self.expect("]")
            return ("kernel", (a, arg))
        if self.peek("o["):
            self.pos += 2
            a = self.integer()
            self.skip_ws(); self.expect(",")
            b = self.integer()
            self.skip_ws(); self.expect(",")
            c = self.integer()
            self.skip_ws(); self.expect("]")
            return ("ext", Degree(a, b, c))
        if self.peek("1"):
            self.pos += 1
            return ("one", None)
        self.error("unexpected character")

    def _edge_index(self) -> MultiIndex:
        if self.peek("_"):
            self.pos += 1
            return self.midx()
        return midx_zero(self.dim())

    def tree_until(self, stop):
        return self.build_tree(self.term(False, stop))

    def build_tree(self, factors) -> Tree:
        d = self.dim()
        poly = midx_zero(d)
        ext = ZERO_DEGREE
        kids = []
        for kind, val in factors:
            if kind == "xi":
                kids.append(((NOISE,), Tree.one(d)))
            elif kind == "poly":
                poly = midx_add(poly, val)
            elif kind == "kernel":
                kids.append(((KERNEL, val[0]), val[1]))
            elif kind == "ext":
                ext = ext + val
            elif kind == "plus":
                self.error("I+ inside a tree")
        return Tree(poly, ext, kids)


def parse(text: str, d: int | None = None):
    """Parse grammar text into a Tree, or a PlusTree when I+ factors occur."""
    p = _Parser(text, d)
    factors = p.term(True, None)
    if any(kind == "plus" for kind, _ in factors):
        dd = p.dim()
        poly = midx_zero(dd)
        facs = []
        for kind, val in factors:
            if kind == "plus":
                facs.append(val)
            elif kind == "poly":
                poly = midx_add(poly, val)
            elif kind == "one":
                pass
            else:
                raise ParseError(f"factor {kind!r} not allowed in a positive tree", text, 0)
        return PlusTree(poly, facs)
    return p.build_tree(factors)


def parse_tree(text: str, d: int | None = None) -> Tree:
    t = parse(text, d)
    if not isinstance(t, Tree):
        raise ParseError("expected a tree, got a positive tree", text, 0)
    return t


def parse_plus(text: str, d: int | None = None) -> PlusTree:
    t = parse(text, d)
    if isinstance(t, Tree):
        if not t.is_polynomial():
            raise ParseError("expected a positive tree", text, 0)
        return PlusTree(t.poly)
    return t


def parse_basis(text: str, d: int | None = None):
    """Parse a basis element, allowing tensors written with ' ⊗ '."""
    parts = [s.strip() for s in text.split("⊗")]
    if len(parts) == 1:
        return parse(parts[0], d)
    return tuple(parse(s, d) for s in parts)


def to_text(x) -> str:
    return basis_text(x)
