"""Polynomials over Q in regularized values.

A :class:`Poly` is a finite sum ``c * L_1 * ... * L_r`` where each leaf ``L``
is a regularized value ``sigma-bar(c)`` or ``gamma-bar(c)`` of a composition.
Every g- and h-coefficient produced by the engine is carried as such a
polynomial, so its membership in the algebra of regularized values is explicit
and it can be re-evaluated from the leaf values alone.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .oracle import Composition
from .padic import PadicNumber, from_rational

Leaf = tuple[str, Composition]  # ("sigma" | "gamma", composition)
Monomial = tuple[Leaf, ...]


def leaf_weight(leaf: Leaf) -> int:
    return leaf[1].weight


def leaf_str(leaf: Leaf) -> str:
    kind, c = leaf
    return f"{'sbar' if kind == 'sigma' else 'gbar'}{c}"


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): Fraction(c)})

    @classmethod
    def leaf(cls, kind: str, c: Composition) -> "Poly":
        if kind not in ("sigma", "gamma"):
            raise ValueError(f"unknown leaf kind {kind!r}")
        return cls({((kind, c),): Fraction(1)})

    # ---------------------------------------------------------------- ring
    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly.const(other)

    def __add__(self, other) -> "Poly":
        other = self._lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return self._lift(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            q = Fraction(other)
            return Poly({m: c * q for m, c in self.terms.items()})
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    # ---------------------------------------------------------------- queries
    def leaves(self) -> set[Leaf]:
        return {leaf for m in self.terms for leaf in m}

    def weights(self) -> set[int]:
        return {sum(leaf_weight(x) for x in m) for m in self.terms}

    def is_homogeneous(self, weight: int) -> bool:
        """Every monomial has total leaf weight ``weight`` (the zero polynomial qualifies)."""
        return all(sum(leaf_weight(x) for x in m) == weight for m in self.terms)

    def evaluate(self, value: Callable[[Leaf], PadicNumber] | Mapping[Leaf, PadicNumber],
                 p: int, precision: int) -> PadicNumber:
        get = value if callable(value) else value.__getitem__
        acc = PadicNumber.zero(p, precision)
        for m, c in self.terms.items():
            term = from_rational(c.numerator, c.denominator, p, precision + 64)
            for leaf in m:
                term = term * get(leaf)
            acc = acc + term
        return acc

    def to_json(self) -> list:
        out = []
        for m in sorted(self.terms, key=lambda m: (len(m), [leaf_str(x) for x in m])):
            c = self.terms[m]
            out.append({"coefficient": str(c),
                        "factors": [{"kind": k, "composition": comp.to_json()} for k, comp in m]})
        return out

    @classmethod
    def from_json(cls, obj: Iterable[dict]) -> "Poly":
        terms = {}
        for t in obj:
            m = tuple(sorted((f["kind"], Composition(tuple(f["composition"]["s"]), tuple(f["composition"]["m"])))
                             for f in t["factors"]))
            terms[m] = terms.get(m, 0) + Fraction(t["coefficient"])
        return cls(terms)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (len(m), [leaf_str(x) for x in m])):
            c = self.terms[m]
            body = "*".join(leaf_str(x) for x in m)
            parts.append(f"({c})" + (f"*{body}" if body else ""))
        return " + ".join(parts)

    __repr__ = __str__
