"""Grid tables of p-adic values indexed by n = 0..n_max.

Every entry ``x_n`` is stored as the integer ``X_n = x_n * p**E mod p**R`` for a
shared scale exponent ``E``.  A table carries one absolute precision ``prec``:
all entries are known modulo ``p**prec``.  Division by ``n**s`` costs
``s * v_p(n)`` digits of the affected entries and the table-wide minimum is kept.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

from .padic import PadicNumber, PadicError, split_unit


class ScaleOverflowError(PadicError):
    """A value fell below valuation -E; enlarge the guard digits."""


class Scale:
    """Fixed-point frame shared by a family of tables."""

    def __init__(self, p: int, n_max: int, scale_exp: int, digits: int):
        if digits <= 2 * scale_exp:
            raise ValueError("digits must exceed twice the scale exponent")
        self.p = p
        self.n_max = n_max
        self.E = scale_exp
        self.R = digits
        self.mod = p**digits
        self.pE = p**scale_exp
        self._vals = [0] * (n_max + 1)
        self._units = [1] * (n_max + 1)
        for n in range(1, n_max + 1):
            v, u = split_unit(n, p)
            self._vals[n] = v
            self._units[n] = u
        self._inv_units = _batch_inverse(self._units, self.mod)
        self._recip: dict[int, list[int]] = {}

    @property
    def max_precision(self) -> int:
        return self.R - self.E

    def v(self, n: int) -> int:
        return self._vals[n]

    def recip_unit_power(self, s: int) -> list[int]:
        """``u_n**(-s) mod p^R`` where ``n = u_n p^{v(n)}``."""
        if s not in self._recip:
            if s == 0:
                row = [1] * (self.n_max + 1)
            elif s > 0:
                base = self.recip_unit_power(s - 1)
                m = self.mod
                row = [b * i % m for b, i in zip(base, self._inv_units)]
            else:
                base = self.recip_unit_power(s + 1)
                m = self.mod
                row = [b * u % m for b, u in zip(base, self._units)]
            self._recip[s] = row
        return self._recip[s]

    def encode(self, value) -> int:
        """Scaled integer of an exact rational or a PadicNumber (digits as exact)."""
        if isinstance(value, PadicNumber):
            if value.is_zero:
                return 0
            shift = value.valuation + self.E
            if shift < 0:
                raise ScaleOverflowError(f"valuation {value.valuation} below -{self.E}")
            return value.unit * self.p**shift % self.mod
        q = Fraction(value)
        if q == 0:
            return 0
        num, den = q.numerator, q.denominator
        vd, ud = split_unit(den, self.p)
        x = num * pow(ud, -1, self.mod) % self.mod
        if vd > self.E:
            vn, _ = split_unit(num, self.p)
            if vn - vd < -self.E:
                raise ScaleOverflowError(f"valuation {vn - vd} below -{self.E}")
            return (x // self.p ** vd) * self.pE % self.mod
        return x * self.p ** (self.E - vd) % self.mod

    def decode(self, x: int, prec: int) -> PadicNumber:
        return PadicNumber.from_scaled(self.p, x % self.mod, -self.E, prec)


def _batch_inverse(xs: list[int], mod: int) -> list[int]:
    n = len(xs)
    pref = [1] * (n + 1)
    for i, x in enumerate(xs):
        pref[i + 1] = pref[i] * x % mod
    inv = pow(pref[n], -1, mod)
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = inv * pref[i] % mod
        inv = inv * xs[i] % mod
    return out


def _vp_int(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while v < cap and x % p == 0:
        x //= p
        v += 1
    return v


class PadicTable:
    """A sequence ``n -> x_n`` on ``0..n_max`` in a shared :class:`Scale`."""

    __slots__ = ("scale", "data", "prec")

    def __init__(self, scale: Scale, data: list[int], prec: int | None = None):
        self.scale = scale
        self.data = data
        self.prec = scale.max_precision if prec is None else min(prec, scale.max_precision)

    # ---------------------------------------------------------------- builders
    @classmethod
    def zeros(cls, scale: Scale) -> "PadicTable":
        return cls(scale, [0] * (scale.n_max + 1))

    @classmethod
    def constant(cls, scale: Scale, value, start: int = 1) -> "PadicTable":
        x = scale.encode(value)
        data = [0] * start + [x] * (scale.n_max + 1 - start)
        prec = value.precision if isinstance(value, PadicNumber) else None
        return cls(scale, data, prec)

    @classmethod
    def delta_at(cls, scale: Scale, n: int, value=1) -> "PadicTable":
        data = [0] * (scale.n_max + 1)
        data[n] = scale.encode(value)
        return cls(scale, data)

    @classmethod
    def from_function(cls, scale: Scale, fn, start: int = 1) -> "PadicTable":
        """Tabulate an exact rational-valued function of ``n``."""
        data = [0] * (scale.n_max + 1)
        for n in range(start, scale.n_max + 1):
            data[n] = scale.encode(fn(n))
        return cls(scale, data)

    @classmethod
    def power_mask(cls, scale: Scale, s: int, residue: int | None = None,
                   skip_multiples: bool = False) -> "PadicTable":
        """``n -> n**(-s)`` on ``n >= 1`` restricted to a residue class mod p."""
        t = cls.constant(scale, 1)
        if residue is not None:
            t = t.restrict(residue)
        if skip_multiples:
            t = t.drop_multiples()
        return t.div_power(s)

    # ---------------------------------------------------------------- algebra
    def _same(self, other: "PadicTable"):
        if other.scale is not self.scale:
            raise ValueError("tables live in different scales")

    def __add__(self, other: "PadicTable") -> "PadicTable":
        self._same(other)
        m = self.scale.mod
        return PadicTable(self.scale, [(a + b) % m for a, b in zip(self.data, other.data)],
                          min(self.prec, other.prec))

    def __sub__(self, other: "PadicTable") -> "PadicTable":
        self._same(other)
        m = self.scale.mod
        return PadicTable(self.scale, [(a - b) % m for a, b in zip(self.data, other.data)],
                          min(self.prec, other.prec))

    def __neg__(self) -> "PadicTable":
        m = self.scale.mod
        return PadicTable(self.scale, [-a % m for a in self.data], self.prec)

    def vmin(self) -> int:
        """Smallest valuation among entries (``max_precision`` if all vanish)."""
        g = reduce(math.gcd, self.data, self.scale.mod)
        return _vp_int(g, self.scale.p, self.scale.R) - self.scale.E

    def scale_by(self, c) -> "PadicTable":
        """Multiply by a scalar (exact rational or PadicNumber)."""
        sc = self.scale
        if isinstance(c, PadicNumber):
            if c.is_zero:
                return PadicTable(sc, [0] * len(self.data), c.precision + self.vmin())
            prec = min(self.prec + c.valuation, c.precision + self.vmin())
            v, u = c.valuation, c.unit
        else:
            q = Fraction(c)
            if q == 0:
                return PadicTable.zeros(sc)
            vn, un = split_unit(q.numerator, sc.p)
            vd, ud = split_unit(q.denominator, sc.p)
            v, u = vn - vd, un * pow(ud, -1, sc.mod)
            prec = self.prec + v
        m = sc.mod
        if v >= 0:
            f = u * sc.p**v % m
            return PadicTable(sc, [a * f % m for a in self.data], prec)
        pk = sc.p ** (-v)
        out = []
        for a in self.data:
            y = a * u % m
            if y % pk:
                raise ScaleOverflowError("scalar division left the fixed-point frame")
            out.append(y // pk)
        return PadicTable(sc, out, prec)

    def __mul__(self, other):
        if not isinstance(other, PadicTable):
            return self.scale_by(other)
        self._same(other)
        sc = self.scale
        m, pE = sc.mod, sc.pE
        out = []
        for a, b in zip(self.data, other.data):
            y = a * b % m
            if y % pE:
                raise ScaleOverflowError("product left the fixed-point frame")
            out.append(y // pE)
        # a*b is known mod p^R at scale p^{2E}, so the product keeps only R - 2E digits
        prec = min(self.prec + other.vmin(), other.prec + self.vmin(), sc.R - 2 * sc.E)
        return PadicTable(sc, out, prec)

    __rmul__ = __mul__

    def div_power(self, s: int) -> "PadicTable":
        """``x_n -> x_n / n**s`` for ``n >= 1``; entry 0 is left unchanged."""
        if s == 0:
            return self
        sc = self.scale
        m, p = sc.mod, sc.p
        inv = sc.recip_unit_power(s)
        out = list(self.data)
        loss = 0
        for n in range(1, len(out)):
            a = out[n]
            if a == 0:
                continue
            y = a * inv[n] % m
            k = sc.v(n) * s
            if k > 0:
                pk = p**k
                if y % pk:
                    raise ScaleOverflowError(f"x_{n}/{n}^{s} left the fixed-point frame")
                y //= pk
                loss = max(loss, k)
            elif k < 0:
                y = y * p ** (-k) % m
            out[n] = y
        return PadicTable(sc, out, self.prec - loss)

    def restrict(self, residue: int) -> "PadicTable":
        p = self.scale.p
        return PadicTable(self.scale, [a if n % p == residue else 0 for n, a in enumerate(self.data)],
                          self.prec)

    def drop_multiples(self) -> "PadicTable":
        p = self.scale.p
        return PadicTable(self.scale, [a if n % p else 0 for n, a in enumerate(self.data)], self.prec)

    def zero_at_origin(self) -> "PadicTable":
        data = list(self.data)
        data[0] = 0
        return PadicTable(self.scale, data, self.prec)

    def prefix_sum(self, inclusive: bool = False) -> "PadicTable":
        """``F(n) = sum_{1 <= a < n} x_a`` (or ``a <= n`` when inclusive)."""
        m = self.scale.mod
        out = [0] * len(self.data)
        acc = 0
        for n in range(1, len(out)):
            if inclusive:
                acc = (acc + self.data[n]) % m
                out[n] = acc
            else:
                out[n] = acc
                acc = (acc + self.data[n]) % m
        return PadicTable(self.scale, out, self.prec)

    def shift(self, k: int) -> "PadicTable":
        """``n -> x_{n+k}``; entries falling off the grid become 0 and are unreliable."""
        n = len(self.data)
        out = [self.data[i + k] if 0 <= i + k < n else 0 for i in range(n)]
        return PadicTable(self.scale, out, self.prec)

    # ---------------------------------------------------------------- access
    def __getitem__(self, n: int) -> PadicNumber:
        return self.scale.decode(self.data[n], self.prec)

    def __len__(self):
        return len(self.data)

    def values(self, ns) -> list[PadicNumber]:
        return [self[n] for n in ns]

    def agreement(self, other: "PadicTable", ns=None) -> int:
        """Minimum valuation of ``self - other`` over ``ns`` (capped at the shared precision)."""
        self._same(other)
        prec = min(self.prec, other.prec)
        cap = self.scale.E + prec
        if cap <= 0:
            return prec
        mod = self.scale.p ** cap
        idx = range(len(self.data)) if ns is None else ns
        g = mod
        for n in idx:
            g = math.gcd(g, (self.data[n] - other.data[n]) % mod)
        return min(_vp_int(g, self.scale.p, cap) - self.scale.E, prec)

    def equals(self, other: "PadicTable", ns=None) -> bool:
        return self.agreement(other, ns) >= min(self.prec, other.prec)

    def is_zero(self, ns=None) -> bool:
        return self.equals(PadicTable.zeros(self.scale), ns)

    def __repr__(self):
        head = ", ".join(str(self[n].to_fraction()) for n in range(min(6, len(self.data))))
        return f"PadicTable(p={self.scale.p}, prec={self.prec}, [{head}, ...])"


def exact_scale(p: int, n_max: int, weight: int, working_precision: int) -> Scale:
    """A scale with enough guard digits for nested sums of total ``weight`` up to ``n_max``."""
    j = 0
    while p**j <= n_max:
        j += 1
    E = weight * j + 8
    R = 3 * E + working_precision + 16
    return Scale(p, n_max, E, R)
