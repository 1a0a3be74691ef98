"""Brute-force ground truth.

Truncated iterated sums

    sigma(s; m)(n) = sum 1 / (n_1^{s_1} ... n_k^{s_k}),  0 < n_1 < ... < n_k < n,  p | (n_i - m_i)

and their last-index versions gamma(s; m)(n), evaluated directly, plus a
term-by-term z-series integration of the Frobenius differential equation.
Nothing in here knows about regularization; it stays definitionally dumb.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .padic import PadicNumber, PrecisionBudget, from_rational
from .tables import PadicTable, Scale
from .words import NCSeries, all_words, concat_mul, series_inverse


@dataclass(frozen=True, order=True)
class Composition:
    s: tuple[int, ...]
    m: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(self.s))
        object.__setattr__(self, "m", tuple(self.m))
        if len(self.s) != len(self.m):
            raise ValueError("exponent and residue tuples differ in length")
        if any(x < 0 for x in self.s):
            raise ValueError("exponents must be >= 0")

    @classmethod
    def basis(cls, s) -> "Composition":
        """The composition of sigma_p(s), all residues 0."""
        s = tuple(s)
        return cls(s, (0,) * len(s))

    @classmethod
    def parse(cls, text: str) -> "Composition":
        """Parse ``"(1,1);(1,0)"``."""
        parts = text.split(";")
        if len(parts) != 2:
            raise ValueError(f"expected '(s...);(m...)', got {text!r}")
        s, m = (tuple(int(x) for x in re.split(r"[,\s]+", part.strip().strip("()")) if x)
                for part in parts)
        return cls(s, m)

    def check(self, p: int) -> "Composition":
        if any(not 0 <= r < p for r in self.m):
            raise ValueError(f"residues must lie in [0, {p})")
        return self

    @property
    def depth(self) -> int:
        return len(self.s)

    @property
    def weight(self) -> int:
        return sum(self.s)

    def prefix(self) -> "Composition":
        return Composition(self.s[:-1], self.m[:-1])

    def append(self, s: int, m: int) -> "Composition":
        return Composition(self.s + (s,), self.m + (m,))

    def __str__(self):
        return f"({','.join(map(str, self.s))});({','.join(map(str, self.m))})"

    def to_json(self) -> dict:
        return {"s": list(self.s), "m": list(self.m)}


EMPTY = Composition((), ())


# --------------------------------------------------------------------- single points
def brute_sigma_exact(c: Composition, n: int, p: int) -> Fraction:
    """Exact rational truncated sum (second, independent oracle for small n)."""
    acc = [Fraction(1)] + [Fraction(0)] * c.depth
    for a in range(1, n):
        for j in range(c.depth, 0, -1):
            if (a - c.m[j - 1]) % p == 0:
                acc[j] += acc[j - 1] / Fraction(a) ** c.s[j - 1]
    return acc[c.depth]


def brute_gamma_exact(c: Composition, n: int, p: int) -> Fraction:
    if c.depth == 0:
        raise ValueError("gamma needs depth >= 1")
    if (n - c.m[-1]) % p:
        return Fraction(0)
    return brute_sigma_exact(c.prefix(), n, p) / Fraction(n) ** c.s[-1]


def _guard(c: Composition, n: int, p: int) -> int:
    j = 0
    while p**j <= max(n, 1):
        j += 1
    return c.weight * j + 4


def brute_sigma(c: Composition, n: int, p: int, precision: int = 12,
                budget: PrecisionBudget | None = None) -> PadicNumber:
    """sigma(c)(n) by streaming prefix accumulation over depth, O(n k) p-adic operations."""
    if n < 1:
        raise ValueError("n must be >= 1")
    work = precision + 2 * _guard(c, n, p)
    one = from_rational(1, 1, p, work)
    acc = [one] + [PadicNumber.zero(p, work)] * c.depth
    for a in range(1, n):
        recip = None
        for j in range(c.depth, 0, -1):
            if (a - c.m[j - 1]) % p == 0:
                if recip is None or recip[0] != c.s[j - 1]:
                    recip = (c.s[j - 1], from_rational(1, a ** c.s[j - 1], p, work))
                acc[j] = acc[j] + acc[j - 1] * recip[1]
    out = acc[c.depth]
    if budget is not None:
        budget.record("brute_sigma", max(0, work - out.precision - 2 * _guard(c, n, p)))
    return out.with_precision(out.precision)


def brute_gamma(c: Composition, n: int, p: int, precision: int = 12) -> PadicNumber:
    if c.depth == 0:
        raise ValueError("gamma needs depth >= 1")
    if (n - c.m[-1]) % p:
        return PadicNumber.zero(p, precision + 2 * _guard(c, n, p))
    return brute_sigma(c.prefix(), n, p, precision) / from_rational(n ** c.s[-1], 1, p, precision + 64)


# --------------------------------------------------------------------- grid tables
class SumTables:
    """Memoized grid tables of sigma(c) and gamma(c) on a shared scale."""

    def __init__(self, scale: Scale):
        self.scale = scale
        self.p = scale.p
        self._sigma: dict[Composition, PadicTable] = {}
        self._gamma: dict[Composition, PadicTable] = {}
        ones = PadicTable.constant(scale, 1)
        self._sigma[EMPTY] = ones

    def sigma(self, c: Composition) -> PadicTable:
        t = self._sigma.get(c)
        if t is None:
            t = self.gamma(c).prefix_sum()
            self._sigma[c] = t
        return t

    def sigma_p(self, s) -> PadicTable:
        return self.sigma(Composition.basis(s))

    def gamma(self, c: Composition) -> PadicTable:
        if c.depth == 0:
            raise ValueError("gamma needs depth >= 1")
        t = self._gamma.get(c)
        if t is None:
            t = self.sigma(c.prefix()).restrict(c.m[-1] % self.p).div_power(c.s[-1])
            self._gamma[c] = t
        return t

    def unit(self) -> PadicTable:
        """The constant-term sequence: 1 at n = 0, 0 elsewhere."""
        return PadicTable.delta_at(self.scale, 0, 1)

    def __len__(self):
        return len(self._sigma) + len(self._gamma)


# --------------------------------------------------------------------- z-series ODE
def integrate_forms(scale: Scale, A: PadicTable | None, B: PadicTable | None,
                    C: PadicTable | None) -> PadicTable:
    """Coefficients ``a_n`` of f with ``df = A*omega_0 + B*omega_p + C*omega_1``.

    Inputs are z-series coefficient tables (index n is the z^n coefficient).
    omega_0 = dz/z, omega_1 = dz/(z-1) = -sum z^k dz,
    omega_p = p z^{p-1} dz/(z^p - 1) = -p sum_{j>=1} z^{pj-1} dz.
    """
    p, m = scale.p, scale.mod
    N = scale.n_max
    rhs = [0] * (N + 1)
    prec = scale.max_precision
    if A is not None:
        if A.data[0] % m:
            raise ValueError("omega_0 applied to a nonzero constant term has no power-series antiderivative")
        rhs = list(A.data)
        prec = min(prec, A.prec)
    if C is not None:
        prec = min(prec, C.prec)
        acc = 0
        for n in range(1, N + 1):
            acc = (acc + C.data[n - 1]) % m
            rhs[n] = (rhs[n] - acc) % m
    if B is not None:
        prec = min(prec, B.prec + 1)
        run = [0] * p
        for n in range(1, N + 1):
            r = n % p
            # sum over k < n with k = n mod p, including k = 0 when p | n
            k = n - p
            if k >= 0:
                run[r] = (run[r] + B.data[k]) % m
            rhs[n] = (rhs[n] - p * run[r]) % m
    rhs[0] = 0
    return PadicTable(scale, rhs, prec).div_power(1)


def conjugate_e1(g: NCSeries) -> NCSeries:
    """``g^{-1} e_1 g`` truncated at the weight of g."""
    W = g.W
    e1 = NCSeries.letter("1", W, g[""])
    return concat_mul(concat_mul(series_inverse(g), e1), g)


def ode_integrate_gfrak(W: int, g_lower: NCSeries, scale: Scale,
                        budget: PrecisionBudget | None = None) -> dict[str, PadicTable]:
    """z-series coefficients of every word of the Frobenius solution up to weight W.

    ``d gfrak = p (e_0 gfrak - gfrak e_0) omega_0 + e_1 gfrak omega_p - p gfrak (g^{-1} e_1 g) omega_1``
    with gfrak(0) = 1.  ``g_lower`` must hold scalar coefficients through weight W - 1.
    """
    p = scale.p
    gW = NCSeries(dict(g_lower.coeffs), W)
    one = from_rational(1, 1, p, scale.max_precision)
    gW[""] = one
    for w in all_words(W):
        if len(w) == W and w not in g_lower:
            gW[w] = PadicNumber.zero(p, scale.max_precision)
    X = conjugate_e1(gW)
    tables: dict[str, PadicTable] = {"": PadicTable.delta_at(scale, 0, 1)}
    for word in all_words(W)[1:]:
        A = B = C = None
        if word[0] == "0":
            A = tables[word[1:]].scale_by(p)
        if word[-1] == "0":
            t = tables[word[:-1]].scale_by(p)
            A = -t if A is None else A - t
        if word[0] == "1":
            B = tables[word[1:]]
        for k in range(len(word)):
            x = X[word[k:]]
            if isinstance(x, int) or x.is_zero and x.precision >= scale.max_precision:
                continue
            term = tables[word[:k]].scale_by(x * (-p))
            C = term if C is None else C + term
        tables[word] = integrate_forms(scale, A, B, C)
        if budget is not None:
            budget.record(f"ode:{word}", scale.max_precision - tables[word].prec)
    return tables
