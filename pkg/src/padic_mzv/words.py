"""Noncommutative series in e_0, e_1 truncated by weight.

Words are strings over ``"0"`` and ``"1"``; ``"011"`` is e_0 e_1 e_1.  Series
coefficients may be any ring-like objects supporting ``+``, ``-`` and ``*``
(PadicNumber, Fraction, symbolic polynomials); a missing word means 0.
"""

from __future__ import annotations

import re
from collections import Counter
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Any, Iterable


def words_of_weight(w: int) -> list[str]:
    return ["".join(t) for t in product("01", repeat=w)]


def all_words(W: int) -> list[str]:
    """Every word of weight <= W, ordered by weight then lexicographically."""
    out = []
    for w in range(W + 1):
        out.extend(words_of_weight(w))
    return out


def depth(word: str) -> int:
    """Number of maximal e_1-blocks."""
    return len([b for b in word.split("0") if b])


@lru_cache(maxsize=None)
def shuffle(u: str, v: str) -> Counter:
    """All interleavings of u and v with multiplicity."""
    if not u:
        return Counter({v: 1})
    if not v:
        return Counter({u: 1})
    out: Counter = Counter()
    for w, c in shuffle(u[1:], v).items():
        out[u[0] + w] += c
    for w, c in shuffle(u, v[1:]).items():
        out[v[0] + w] += c
    return out


def zeta_word(indices: Iterable[int]) -> str:
    """``(s_k, ..., s_1) -> e_0^{s_k-1} e_1 ... e_0^{s_1-1} e_1``."""
    idx = list(indices)
    if any(s < 1 for s in idx):
        raise ValueError("zeta indices must be >= 1")
    return "".join("0" * (s - 1) + "1" for s in idx)


def word_to_zeta(word: str) -> tuple[int, ...]:
    if word and not word.endswith("1"):
        raise ValueError(f"{word!r} does not end in e_1")
    return tuple(len(b) + 1 for b in word.split("1")[:-1])


def parse_indices(text: str) -> tuple[int, ...]:
    body = text.strip().strip("()")
    if not body:
        return ()
    return tuple(int(x) for x in re.split(r"[,\s]+", body) if x)


class NCSeries:
    """Truncated series sum_w c_w e^w with ``len(w) <= W``."""

    def __init__(self, coeffs: dict[str, Any] | None = None, W: int = 0):
        self.W = W
        self.coeffs = {w: c for w, c in (coeffs or {}).items() if len(w) <= W}

    @classmethod
    def one(cls, W: int, unit=1) -> "NCSeries":
        return cls({"": unit}, W)

    @classmethod
    def letter(cls, a: str, W: int, unit=1) -> "NCSeries":
        return cls({a: unit}, W)

    def __getitem__(self, w: str):
        return self.coeffs.get(w, 0)

    def __setitem__(self, w: str, c):
        if len(w) <= self.W:
            self.coeffs[w] = c

    def __contains__(self, w: str):
        return w in self.coeffs

    def words(self) -> list[str]:
        return sorted(self.coeffs, key=lambda w: (len(w), w))

    def __add__(self, other: "NCSeries") -> "NCSeries":
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            out[w] = out[w] + c if w in out else c
        return NCSeries(out, min(self.W, other.W))

    def __neg__(self) -> "NCSeries":
        return NCSeries({w: -c for w, c in self.coeffs.items()}, self.W)

    def __sub__(self, other: "NCSeries") -> "NCSeries":
        return self + (-other)

    def scale(self, c) -> "NCSeries":
        return NCSeries({w: x * c for w, x in self.coeffs.items()}, self.W)

    def __mul__(self, other):
        if isinstance(other, NCSeries):
            return concat_mul(self, other)
        return self.scale(other)

    def __repr__(self):
        return "NCSeries(" + ", ".join(f"{w or '1'}: {self.coeffs[w]!r}" for w in self.words()) + ")"


def concat_mul(a: NCSeries, b: NCSeries) -> NCSeries:
    W = min(a.W, b.W)
    out: dict[str, Any] = {}
    for u, cu in a.coeffs.items():
        for v, cv in b.coeffs.items():
            if len(u) + len(v) > W:
                continue
            term = cu * cv
            w = u + v
            out[w] = out[w] + term if w in out else term
    return NCSeries(out, W)


def series_inverse(a: NCSeries) -> NCSeries:
    """Inverse of a series with constant term 1, via the geometric series in 1 - a."""
    c0 = a[""]
    if not (c0 == 1):
        raise ValueError("series_inverse requires constant term 1")
    nil = NCSeries({w: -c for w, c in a.coeffs.items() if w}, a.W)
    out = NCSeries.one(a.W, c0)
    power = NCSeries.one(a.W, c0)
    for _ in range(a.W):
        power = concat_mul(power, nil)
        out = out + power
    return out


def shuffle_mul(u: str, v: str) -> Counter:
    return shuffle(u, v)


def evaluate_linear(a: NCSeries, combo: Counter):
    acc = 0
    for w, k in combo.items():
        c = a[w]
        if isinstance(c, int) and c == 0:
            continue
        acc = acc + c * k
    return acc


def grouplike_residual(a: NCSeries, W: int | None = None) -> dict[tuple[str, str], Any]:
    """``a[u sh v] - a[u] a[v]`` over unordered pairs of nonempty words with |u|+|v| <= W."""
    W = a.W if W is None else W
    words = [w for w in all_words(W - 1) if w]
    out = {}
    for i, u in enumerate(words):
        for v in words[i:]:
            if len(u) + len(v) > W:
                continue
            out[(u, v)] = evaluate_linear(a, shuffle(u, v)) - a[u] * a[v]
    return out


def exp_series(lie: NCSeries) -> NCSeries:
    """exp of a series without constant term (used to build group-like test data)."""
    from fractions import Fraction

    out = NCSeries.one(lie.W)
    power = NCSeries.one(lie.W)
    for k in range(1, lie.W + 1):
        power = concat_mul(power, lie)
        out = out + power.scale(Fraction(1, factorial(k)))
    return out


def lie_bracket(a: NCSeries, b: NCSeries) -> NCSeries:
    return concat_mul(a, b) - concat_mul(b, a)


def reverse_sign(a: NCSeries) -> NCSeries:
    """The antipode image: ``w -> (-1)^{|w|} a[reverse(w)]``."""
    return NCSeries({w[::-1]: (c if len(w) % 2 == 0 else -c) for w, c in a.coeffs.items()}, a.W)
