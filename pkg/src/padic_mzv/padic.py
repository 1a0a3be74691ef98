"""Fixed absolute-precision arithmetic in Q_p.

A :class:`PadicNumber` stores ``unit * p**valuation`` where the value is known
modulo ``p**precision`` (absolute precision).  The unit is therefore known
modulo ``p**(precision - valuation)``.  Zero at the current precision is
represented with ``unit == 0`` and ``valuation == precision``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable


class PadicError(ArithmeticError):
    """Base class for p-adic arithmetic failures."""


class PrecisionExhaustedError(PadicError):
    pass


class PrimeMismatchError(PadicError):
    pass


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def split_unit(n: int, p: int) -> tuple[int, int]:
    """Return ``(v, u)`` with ``n == u * p**v`` and ``p`` not dividing ``u``."""
    v = valuation(n, p)
    return v, n // p**v


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class PadicNumber:
    p: int
    valuation: int
    unit: int
    precision: int

    def __post_init__(self):
        if self.unit == 0:
            if self.valuation != self.precision:
                object.__setattr__(self, "valuation", self.precision)
            return
        rel = self.precision - self.valuation
        if rel <= 0:
            object.__setattr__(self, "unit", 0)
            object.__setattr__(self, "valuation", self.precision)
            return
        if self.unit % self.p == 0:
            raise ValueError("unit part must be coprime to p")
        object.__setattr__(self, "unit", self.unit % self.p**rel)

    # ------------------------------------------------------------ construction
    @classmethod
    def zero(cls, p: int, precision: int) -> "PadicNumber":
        return cls(p, precision, 0, precision)

    @classmethod
    def from_scaled(cls, p: int, x: int, shift: int, precision: int) -> "PadicNumber":
        """The number ``x * p**shift`` known modulo ``p**precision``."""
        if precision - shift > 0:
            x %= p ** (precision - shift)
        else:
            x = 0
        if x == 0:
            return cls.zero(p, precision)
        v, u = split_unit(x, p)
        return cls(p, v + shift, u, precision)

    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def relative_precision(self) -> int:
        return self.precision - self.valuation

    def _check(self, other: "PadicNumber"):
        if other.p != self.p:
            raise PrimeMismatchError(f"primes differ: {self.p} vs {other.p}")

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            self._check(other)
            return other
        if isinstance(other, (int, Rational)):
            q = Fraction(other)
            # exact rationals never limit the result's precision
            return from_rational(q.numerator, q.denominator, self.p,
                                 max(self.precision, 0) + 2 * abs(self.valuation) + 64)
        return NotImplemented

    # ------------------------------------------------------------ arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.precision, other.precision)
        v0 = min(self.valuation, other.valuation)
        x = self.unit * self.p ** (self.valuation - v0) + other.unit * self.p ** (other.valuation - v0)
        return PadicNumber.from_scaled(self.p, x, v0, prec)

    __radd__ = __add__

    def __neg__(self):
        return PadicNumber(self.p, self.valuation, -self.unit, self.precision)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.precision + other.valuation, other.precision + self.valuation)
        if self.is_zero or other.is_zero:
            return PadicNumber.zero(self.p, prec)
        return PadicNumber(self.p, self.valuation + other.valuation, self.unit * other.unit, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.is_zero:
            raise ZeroDivisionError("division by zero")
        rel = self.relative_precision
        u = pow(self.unit, -1, self.p**rel)
        return PadicNumber(self.p, -self.valuation, u, rel - self.valuation)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = from_rational(1, 1, self.p, self.precision + 64 * k)
        for _ in range(k):
            out = out * self
        return out

    # ------------------------------------------------------------ queries
    def with_precision(self, precision: int) -> "PadicNumber":
        """Truncate to a lower absolute precision (never raises precision)."""
        return PadicNumber.from_scaled(self.p, self.unit, self.valuation,
                                       min(precision, self.precision))

    def lift(self, precision: int) -> "PadicNumber":
        """Treat the known digits as exact and pad to ``precision``."""
        if self.is_zero:
            return PadicNumber.zero(self.p, precision)
        return PadicNumber(self.p, self.valuation, self.unit, max(precision, self.precision))

    def equals(self, other, precision: int | None = None) -> bool:
        """Equality modulo the smaller absolute precision (or ``precision``)."""
        other = self._coerce(other)
        d = self - other
        target = d.precision if precision is None else min(precision, d.precision)
        return d.is_zero or d.valuation >= target

    def __eq__(self, other):
        if not isinstance(other, (PadicNumber, int, Rational)):
            return NotImplemented
        return self.equals(other)

    def __hash__(self):
        return hash((self.p, self.valuation, self.unit, self.precision))

    def to_fraction(self) -> Fraction:
        """Canonical rational representative (unit in [0, p^rel))."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.valuation

    def digits(self) -> list[int]:
        """Base-p digits of the unit, little-endian, ``relative_precision`` of them."""
        u, out = self.unit, []
        for _ in range(max(self.relative_precision, 0)):
            u, d = divmod(u, self.p)
            out.append(d)
        return out

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "valuation": self.valuation,
            "unit_digits": "".join(_digit_char(d) for d in self.digits()) if not self.is_zero else "",
            "precision": self.precision,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PadicNumber":
        p = obj["p"]
        digits = [int(c, 36) for c in obj["unit_digits"]]
        unit = sum(d * p**i for i, d in enumerate(digits))
        if unit == 0:
            return cls.zero(p, obj["precision"])
        return cls(p, obj["valuation"], unit, obj["precision"])

    def __repr__(self):
        if self.is_zero:
            return f"O({self.p}^{self.precision})"
        return f"{self.to_fraction()} + O({self.p}^{self.precision})"


def _digit_char(d: int) -> str:
    return "0123456789abcdefghijklmnopqrstuvwxyz"[d]


def from_rational(num: int, den: int, p: int, precision: int) -> PadicNumber:
    """The rational ``num/den`` as an element of Q_p known modulo ``p**precision``."""
    if den == 0:
        raise ZeroDivisionError("denominator is zero")
    if num == 0:
        return PadicNumber.zero(p, precision)
    vn, un = split_unit(num, p)
    vd, ud = split_unit(den, p)
    v = vn - vd
    rel = precision - v
    if rel <= 0:
        return PadicNumber.zero(p, precision)
    return PadicNumber(p, v, un * pow(ud, -1, p**rel), precision)


def padd(a: PadicNumber, b: PadicNumber) -> PadicNumber:
    return a + b


def pmul(a: PadicNumber, b: PadicNumber) -> PadicNumber:
    return a * b


def pinv(a: PadicNumber) -> PadicNumber:
    return a.inverse()


@dataclass
class PrecisionBudget:
    """Working precision plus a log of digits lost, tagged by operation."""

    working_precision: int
    loss_log: list[tuple[str, int]] = field(default_factory=list)

    def charge(self, tag: str, digits: int) -> None:
        if digits <= 0:
            return
        self.loss_log.append((tag, digits))
        if self.remaining <= 0:
            raise PrecisionExhaustedError(
                f"precision exhausted after {tag}: lost {self.total_loss} of {self.working_precision} digits")

    def record(self, tag: str, digits: int) -> None:
        """Log a loss without enforcing the budget (diagnostics only)."""
        if digits > 0:
            self.loss_log.append((tag, digits))

    @property
    def total_loss(self) -> int:
        return sum(d for _, d in self.loss_log)

    @property
    def remaining(self) -> int:
        return self.working_precision - self.total_loss

    def report(self) -> dict:
        """Losses per operation: event count, worst single loss and the sum over events.

        Events under one tag usually act on different values, so the worst single
        loss is the figure that bounds any one reported number.
        """
        by_tag: dict[str, dict[str, int]] = {}
        for tag, d in self.loss_log:
            e = by_tag.setdefault(tag, {"events": 0, "max_loss": 0, "total": 0})
            e["events"] += 1
            e["max_loss"] = max(e["max_loss"], d)
            e["total"] += d
        return {"working_precision": self.working_precision, "total_loss": self.total_loss,
                "max_single_loss": max((d for _, d in self.loss_log), default=0),
                "by_operation": dict(sorted(by_tag.items()))}


def min_valuation(xs: Iterable[PadicNumber]) -> int | None:
    vals = [x.valuation for x in xs if not x.is_zero]
    return min(vals) if vals else None
