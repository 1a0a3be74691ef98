"""Power series functions: one truncated series per residue class mod p.

Branch ``i`` holds coefficients of a series in ``x = n - i`` that represents the
function on the class ``n = i mod p``.  The value "at 0" is the constant term of
branch 0.  Fitting from samples uses Newton divided differences on the smallest
class members; held-out samples give an empirical bound on the truncated tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Mapping, Sequence

from .padic import PadicNumber, PadicError, PrecisionBudget, from_rational, valuation
from .tables import PadicTable


class FitRejectedError(PadicError):
    """Samples are not reproduced by a degree-D series: not PSF-like."""


class DegreeExceededError(PadicError):
    pass


def _zero(p: int, prec: int) -> PadicNumber:
    return PadicNumber.zero(p, prec)


@dataclass(frozen=True)
class PSF:
    p: int
    branches: tuple[tuple[PadicNumber, ...], ...]
    tail_valuation_bound: int | None = None
    domain_start: int = 1

    def __post_init__(self):
        if len(self.branches) != self.p:
            raise ValueError("a PSF needs exactly p branches")
        object.__setattr__(self, "branches", tuple(tuple(b) for b in self.branches))

    @property
    def degree(self) -> int:
        return max(len(b) for b in self.branches) - 1

    @property
    def precision(self) -> int:
        precs = [c.precision for b in self.branches for c in b]
        return min(precs) if precs else 0

    def coeff(self, i: int, j: int) -> PadicNumber:
        b = self.branches[i]
        if j < len(b):
            return b[j]
        return _zero(self.p, self.precision)

    def __call__(self, n: int) -> PadicNumber:
        i = n % self.p
        x = n - i
        b = self.branches[i]
        acc = b[-1]
        for c in reversed(b[:-1]):
            acc = acc * x + c
        if self.tail_valuation_bound is not None:
            acc = acc.with_precision(self.tail_valuation_bound)
        return acc

    def __add__(self, other: "PSF") -> "PSF":
        return psf_add(self, other)

    def __mul__(self, other):
        if isinstance(other, PSF):
            return psf_mul(self, other)
        return PSF(self.p, tuple(tuple(c * other for c in b) for b in self.branches),
                   self.tail_valuation_bound, self.domain_start)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other: "PSF") -> "PSF":
        return psf_add(self, -other)

    def to_json(self) -> dict:
        return {"p": self.p, "degree": self.degree, "domain_start": self.domain_start,
                "tail_valuation_bound": self.tail_valuation_bound,
                "branches": [[c.to_json() for c in b] for b in self.branches]}

    @classmethod
    def from_json(cls, obj: dict) -> "PSF":
        return cls(obj["p"], tuple(tuple(PadicNumber.from_json(c) for c in b) for b in obj["branches"]),
                   obj.get("tail_valuation_bound"), obj.get("domain_start", 1))


def _min_bound(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def psf_constant(p: int, value, degree: int = 0, precision: int = 64) -> PSF:
    c = value if isinstance(value, PadicNumber) else from_rational(
        Fraction(value).numerator, Fraction(value).denominator, p, precision)
    z = _zero(p, c.precision)
    return PSF(p, tuple((c,) + (z,) * degree for _ in range(p)))


def psf_identity(p: int, precision: int = 64) -> PSF:
    """iota: n -> n."""
    one = from_rational(1, 1, p, precision)
    return PSF(p, tuple((from_rational(i, 1, p, precision), one) for i in range(p)))


def psf_indicator(p: int, residue: int, precision: int = 64) -> PSF:
    one, zero = from_rational(1, 1, p, precision), _zero(p, precision)
    return PSF(p, tuple((one if i == residue else zero,) for i in range(p)))


def psf_add(f: PSF, g: PSF) -> PSF:
    if f.p != g.p:
        raise ValueError("primes differ")
    out = []
    for bf, bg in zip(f.branches, g.branches):
        n = max(len(bf), len(bg))
        zf, zg = _zero(f.p, f.precision), _zero(f.p, g.precision)
        out.append(tuple((bf[j] if j < len(bf) else zf) + (bg[j] if j < len(bg) else zg)
                         for j in range(n)))
    return PSF(f.p, tuple(out), _min_bound(f.tail_valuation_bound, g.tail_valuation_bound),
               max(f.domain_start, g.domain_start))


def _series_mul(a: Sequence[PadicNumber], b: Sequence[PadicNumber], D: int) -> tuple:
    out = []
    for k in range(D + 1):
        acc = None
        for j in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
            t = a[j] * b[k - j]
            acc = t if acc is None else acc + t
        out.append(acc)
    return tuple(out)


def psf_mul(f: PSF, g: PSF) -> PSF:
    """Branchwise product at full degree, so it evaluates to f(n)·g(n) exactly.

    Truncating to the smaller degree would drop terms whose x^k factor is
    only p^k small against coefficients that can carry negative valuation.
    The tail bound is the smaller one, valid for factors with integral values.
    """
    if f.p != g.p:
        raise ValueError("primes differ")
    return PSF(f.p, tuple(_series_mul(a, b, len(a) + len(b) - 2)
                          for a, b in zip(f.branches, g.branches)),
               _min_bound(f.tail_valuation_bound, g.tail_valuation_bound),
               max(f.domain_start, g.domain_start))


def psf_power_mask(p: int, s: int, D: int = 8, precision: int = 64) -> PSF:
    """``n -> n**s`` off multiples of p, 0 on multiples of p; branch i is the binomial series of (x+i)^s."""
    zero = _zero(p, precision)
    branches = [(zero,)]
    for i in range(1, p):
        coeffs = []
        deg = s if 0 <= s <= D else D
        for k in range(deg + 1):
            c = Fraction(_gen_binom(s, k)) * Fraction(i) ** (s - k)
            coeffs.append(from_rational(c.numerator, c.denominator, p, precision))
        branches.append(tuple(coeffs))
    return PSF(p, tuple(branches))


def _gen_binom(s: int, k: int) -> Fraction:
    if s >= 0:
        return Fraction(comb(s, k))
    num = 1
    for j in range(k):
        num *= s - j
    return Fraction(num, factorial(k))


def psf_round1(f: PSF, D: int = 8) -> PSF:
    """f^{(1)}: (f(n) - f(0))/n on multiples of p, f(n)/n elsewhere.

    Off the multiples of p the quotient is an infinite series; it is kept to
    degree ``max(D, f.degree)``.
    """
    return _one_division(f, keep_units=True, D=D)


def psf_sharp1(f: PSF) -> PSF:
    """f^{[1]}: (f(n) - f(0))/n on multiples of p, 0 elsewhere."""
    return _one_division(f, keep_units=False)


def _one_division(f: PSF, keep_units: bool, D: int = 0) -> PSF:
    p = f.p
    D = max(D, f.degree)
    b0 = f.branches[0]
    head = tuple(b0[1:]) if len(b0) > 1 else (_zero(p, f.precision),)
    out = [head]
    if keep_units:
        inv = psf_power_mask(p, -1, D, f.precision + 4 * D)
        for i in range(1, p):
            out.append(_series_mul(f.branches[i], inv.branches[i], D))
    else:
        out.extend((_zero(p, f.precision),) for _ in range(1, p))
    return PSF(p, tuple(out), f.tail_valuation_bound, f.domain_start)


# ------------------------------------------------------------------ Faulhaber sums
@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli numbers with B_1 = -1/2."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(comb(m + 1, k) * B[k] for k in range(m)) / Fraction(m + 1))
    return B[n]


@lru_cache(maxsize=None)
def faulhaber(j: int) -> tuple[Fraction, ...]:
    """Coefficients (constant first) of S_j(T) = sum_{t=0}^{T} t^j, with 0^0 = 1."""
    if j == 0:
        return (Fraction(1), Fraction(1))
    coeffs = [Fraction(0)] * (j + 2)
    for k in range(j + 1):
        bk = bernoulli(k) if k != 1 else Fraction(1, 2)
        coeffs[j + 1 - k] += Fraction(comb(j + 1, k)) * bk / (j + 1)
    return tuple(coeffs)


def _poly_eval_frac(coeffs: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _poly_affine(coeffs: Sequence[Fraction], a: Fraction, b: Fraction) -> list[Fraction]:
    """Coefficients in x of P(a x + b)."""
    out = [Fraction(0)] * len(coeffs)
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        for r in range(k + 1):
            out[r] += c * comb(k, r) * a**r * b ** (k - r)
    return out


def psf_prefix_sum(f: PSF, n0: int = 1, budget: PrecisionBudget | None = None) -> PSF:
    """G(n) = sum_{n0 <= k <= n} f(k), with f's branches taken as polynomials.

    Each source branch is summed over its progression by Faulhaber's formula in
    exact rationals and re-expanded around the target residue.
    """
    p = f.p
    prec = f.precision
    out_branches = []
    worst = 0
    for r in range(p):
        acc: list[PadicNumber] = []
        for i in range(p):
            b = f.branches[i]
            t_lo = -((i - n0) // p)            # ceil((n0 - i)/p)
            # t_hi = floor((n - i)/p) with n = r + x and p | x
            shift = (r - i) // p               # floor((r - i)/p)
            for j, cij in enumerate(b):
                # P_i(p t) term: cij * p^j * t^j summed over t_lo..t_hi
                poly = _poly_affine(faulhaber(j), Fraction(1, p), Fraction(shift))
                const = _poly_eval_frac(faulhaber(j), Fraction(t_lo - 1))
                poly[0] -= const
                scaled = [q * p**j for q in poly]
                for k, q in enumerate(scaled):
                    if q == 0:
                        continue
                    vq = valuation(q.numerator, p) - valuation(q.denominator, p)
                    worst = max(worst, -vq)
                    term = cij * q
                    while len(acc) <= k:
                        acc.append(_zero(p, prec))
                    acc[k] = acc[k] + term
        out_branches.append(tuple(acc) if acc else (_zero(p, prec),))
    if budget is not None:
        budget.record("psf_prefix_sum", worst)
    return PSF(p, tuple(out_branches), f.tail_valuation_bound, n0)


# ------------------------------------------------------------------ fitting
def newton_coefficients(xs: Sequence[int], ys: Sequence[PadicNumber]) -> list[PadicNumber]:
    """Monomial coefficients of the interpolating polynomial through (xs, ys)."""
    n = len(xs)
    dd = list(ys)
    newton = [dd[0]]
    for k in range(1, n):
        dd = [(dd[i + 1] - dd[i]) / (xs[i + k] - xs[i]) for i in range(n - k)]
        newton.append(dd[0])
    # expand sum newton[k] * prod_{i<k} (x - xs[i]) into monomials (Horner from the top)
    zero = PadicNumber.zero(ys[0].p, min(c.precision for c in newton) + 64)
    poly = [newton[-1]]
    for k in range(n - 2, -1, -1):
        shifted = [zero] + poly
        for i in range(len(poly)):
            shifted[i] = shifted[i] - poly[i] * xs[k]
        shifted[0] = shifted[0] + newton[k]
        poly = shifted
    return poly


def fit_nodes(p: int, residue: int, D: int, start: int = 1) -> list[int]:
    first = residue if residue >= start else residue + p * (-(-(start - residue) // p))
    if first == 0:
        first = p
    return [first + p * t for t in range(D + 1)]


def holdout_nodes(p: int, residue: int, D: int, n_max: int, start: int = 1, extra: int = 3) -> list[int]:
    nodes = fit_nodes(p, residue, D, start)
    out = [nodes[-1] + p * t for t in range(1, extra + 1)]
    j = 2
    while True:
        n = residue + p**j
        if n > n_max:
            break
        if n not in nodes and n not in out:
            out.append(n)
        j += 1
    return [n for n in out if n <= n_max]


def psf_fit(samples: Mapping[int, PadicNumber], residue: int, D: int, p: int,
            holdout: Sequence[int] = (), threshold: int | None = None,
            budget: PrecisionBudget | None = None) -> tuple[tuple[PadicNumber, ...], int | None]:
    """Fit branch ``residue`` from samples; return (coefficients in x = n - residue, tail bound).

    The first D+1 sample nodes in the class are interpolated; every node in
    ``holdout`` is predicted and the smallest residual valuation is the tail bound.
    """
    nodes = sorted(n for n in samples if n % p == residue and n not in holdout)[: D + 1]
    if len(nodes) < D + 1:
        raise ValueError(f"need {D + 1} samples in class {residue}, have {len(nodes)}")
    xs = [n - residue for n in nodes]
    coeffs = newton_coefficients(xs, [samples[n] for n in nodes])
    if budget is not None:
        budget.record("psf_fit", valuation(factorial(D), p) + D)
    bound = None
    for n in holdout:
        x = n - residue
        pred = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            pred = pred * x + c
        r = pred - samples[n]
        rv = r.valuation
        bound = rv if bound is None else min(bound, rv)
    if threshold is not None and bound is not None and bound < threshold:
        raise FitRejectedError(
            f"fit rejected: function not PSF-like at degree {D} (residual valuation {bound} < {threshold})")
    return tuple(coeffs), bound


def fit_table(table: PadicTable, D: int = 8, threshold: int | None = None,
              residues: Sequence[int] | None = None, start: int = 1,
              budget: PrecisionBudget | None = None) -> PSF:
    """Fit every branch (or the listed ones) of a grid table."""
    p = table.scale.p
    n_max = table.scale.n_max
    branches = []
    bound = None
    for i in range(p):
        if residues is not None and i not in residues:
            branches.append((_zero(p, table.prec),))
            continue
        nodes = fit_nodes(p, i, D, start)
        held = holdout_nodes(p, i, D, n_max, start)
        samples = {n: table[n] for n in nodes + held}
        coeffs, b = psf_fit(samples, i, D, p, held, threshold, budget)
        branches.append(coeffs)
        bound = _min_bound(bound, b)
    return PSF(p, tuple(branches), bound, start)


def psf_value_at_zero(f: PSF) -> PadicNumber:
    c = f.coeff(0, 0)
    if f.tail_valuation_bound is not None:
        c = c.with_precision(f.tail_valuation_bound)
    return c


def psf_taylor(f: PSF, j: int, D: int = 8) -> PadicNumber:
    """Raw coefficient a_{0,j} of branch 0 (the j-th derivative at 0 divided by j!).

    Orders up to ``max(D, f.degree)`` are defined; unstored ones are zero.
    """
    cap = max(D, f.degree)
    if j > cap:
        raise DegreeExceededError(f"degree exceeded: {j} > {cap}")
    c = f.coeff(0, j)
    if f.tail_valuation_bound is not None:
        c = c.with_precision(f.tail_valuation_bound - j)
    return c


@dataclass(frozen=True)
class LaurentPSF:
    """A PSF plus a principal part sum_j c_j n^{-j} living on the class p | n only."""

    psf: PSF
    principal: tuple[PadicNumber, ...] = field(default=())

    def __call__(self, n: int) -> PadicNumber:
        out = self.psf(n)
        if n % self.psf.p == 0:
            for j, c in enumerate(self.principal, start=1):
                out = out + c / from_rational(n**j, 1, self.psf.p, c.precision + 64)
        return out

    def project_s(self) -> PSF:
        return self.psf

    def to_json(self) -> dict:
        d = self.psf.to_json()
        d["principal"] = [c.to_json() for c in self.principal]
        return d


def project_s(f: LaurentPSF) -> PSF:
    """Delete the principal part on the class p | n."""
    return f.psf


def laurent_from_pole(f: PSF, pole: int, D: int = 8) -> LaurentPSF:
    """The Laurent function n^{-pole} f(n) on p | n (and f(n)/n^pole elsewhere)."""
    if pole <= 0:
        return LaurentPSF(f)
    p = f.p
    b0 = list(f.branches[0])
    prec = f.precision
    while len(b0) <= pole:
        b0.append(_zero(p, prec))
    principal = tuple(b0[pole - j] for j in range(1, pole + 1))
    regular = tuple(b0[pole:])
    D = max(D, f.degree)
    inv = psf_power_mask(p, -pole, D, prec + 4 * D * pole)
    others = [_series_mul(f.branches[i], inv.branches[i], D) for i in range(1, p)]
    tail = None if f.tail_valuation_bound is None else f.tail_valuation_bound - pole
    return LaurentPSF(PSF(p, (regular,) + tuple(others), tail, f.domain_start),
                      principal)
