"""Iterated sums as combinations of the divergent basis sigma_p(t).

A :class:`SigmaExpr` is ``sum_t c_t(n) * sigma_p(t)(n)`` with coefficients held
as exact grid tables.  :meth:`SigmaAlgebra.expand_sigma` builds the expansion of
``sigma(s; m)`` by depth recursion (Abel summation plus Taylor splitting on the
class p | n), so evaluating the expansion on the grid reproduces the brute-force
sum exactly.  Fits of the tables are taken only where a limit or a Taylor
coefficient is needed.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable

from .oracle import Composition, SumTables
from .padic import PadicError, PadicNumber, PrecisionBudget
from .psf import (PSF, FitRejectedError, LaurentPSF, fit_table, laurent_from_pole, project_s,
                  psf_taylor, psf_value_at_zero)
from .tables import PadicTable

log = logging.getLogger(__name__)

Basis = tuple[int, ...]


class ExpansionInconsistencyError(PadicError):
    pass


class RegularizationError(PadicError):
    pass


@dataclass
class Coefficient:
    """Exact grid table, read as ``table(n) / n**pole`` (pole only arises on the class p | n)."""

    table: PadicTable
    pole: int = 0

    def values(self) -> PadicTable:
        return self.table.div_power(self.pole) if self.pole else self.table

    def __add__(self, other: "Coefficient") -> "Coefficient":
        if self.pole == other.pole:
            return Coefficient(self.table + other.table, self.pole)
        return Coefficient(self.values() + other.values())

    def __neg__(self):
        return Coefficient(-self.table, self.pole)

    def scale(self, c) -> "Coefficient":
        return Coefficient(self.table.scale_by(c), self.pole)


@dataclass
class SigmaExpr:
    """``sum_t coeff_t * sigma_p(t)`` over a grid."""

    sums: SumTables
    terms: dict[Basis, Coefficient] = field(default_factory=dict)
    source: Composition | None = None
    fit_precision: int | None = None

    # -------------------------------------------------------------- algebra
    def __add__(self, other: "SigmaExpr") -> "SigmaExpr":
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out[t] + c if t in out else c
        return SigmaExpr(self.sums, out, None, _minp(self.fit_precision, other.fit_precision))

    def __neg__(self):
        return SigmaExpr(self.sums, {t: -c for t, c in self.terms.items()}, self.source, self.fit_precision)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SigmaExpr":
        return SigmaExpr(self.sums, {t: v.scale(c) for t, v in self.terms.items()}, None, self.fit_precision)

    def __mul__(self, other):
        if isinstance(other, SigmaExpr):
            return sigma_mul(self, other)
        return self.scale(other)

    # -------------------------------------------------------------- evaluation
    def table(self) -> PadicTable:
        acc = None
        for t, c in self.terms.items():
            term = c.values() if not t else c.values() * self.sums.sigma_p(t)
            acc = term if acc is None else acc + term
        return acc if acc is not None else PadicTable.zeros(self.sums.scale)

    def __call__(self, n: int) -> PadicNumber:
        return self.table()[n]

    def basis(self) -> list[Basis]:
        return sorted(self.terms, key=lambda t: (len(t), t))

    def to_json(self, fit_degree: int | None = None) -> dict:
        out = {"terms": []}
        if self.source is not None:
            out["composition"] = self.source.to_json()
        for t in self.basis():
            c = self.terms[t]
            entry = {"basis": list(t), "pole": c.pole}
            if fit_degree is not None:
                try:
                    entry["coefficient_psf"] = fit_table(c.table, fit_degree).to_json()
                except FitRejectedError as exc:
                    entry["coefficient_psf"] = None
                    entry["fit_error"] = str(exc)
            out["terms"].append(entry)
        return out


def _minp(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


# ------------------------------------------------------------------ combinatorics
@lru_cache(maxsize=None)
def stuffle(u: Basis, v: Basis) -> Counter:
    """Quasi-shuffle of exponent tuples: sigma_p(u) * sigma_p(v) = sum c_w sigma_p(w)."""
    if not u:
        return Counter({v: 1})
    if not v:
        return Counter({u: 1})
    out: Counter = Counter()
    for w, k in stuffle(u[:-1], v).items():
        out[w + (u[-1],)] += k
    for w, k in stuffle(u, v[:-1]).items():
        out[w + (v[-1],)] += k
    for w, k in stuffle(u[:-1], v[:-1]).items():
        out[w + (u[-1] + v[-1],)] += k
    return out


def stuffle_compositions(a: Composition, b: Composition) -> Counter:
    """Quasi-shuffle with residues; index collisions need equal residues."""
    if a.depth == 0:
        return Counter({b: 1})
    if b.depth == 0:
        return Counter({a: 1})
    out: Counter = Counter()
    for w, k in stuffle_compositions(a.prefix(), b).items():
        out[w.append(a.s[-1], a.m[-1])] += k
    for w, k in stuffle_compositions(a, b.prefix()).items():
        out[w.append(b.s[-1], b.m[-1])] += k
    if a.m[-1] == b.m[-1]:
        for w, k in stuffle_compositions(a.prefix(), b.prefix()).items():
            out[w.append(a.s[-1] + b.s[-1], a.m[-1])] += k
    return out


def dominated(t: Basis, s: Iterable[int]) -> bool:
    """``t <= s``: an increasing map j with t_i <= s_{j(i)}."""
    s = tuple(s)
    k = 0
    for ti in t:
        while k < len(s) and s[k] < ti:
            k += 1
        if k == len(s):
            return False
        k += 1
    return True


def dominated_bases(s: Iterable[int]) -> list[Basis]:
    """Every basis tuple (entries >= 1) dominated by s, including the empty one."""
    s = tuple(s)
    out = set()
    for r in range(len(s) + 1):
        for idx in combinations(range(len(s)), r):
            for vals in product(*(range(1, s[i] + 1) for i in idx)):
                out.add(tuple(vals))
    return sorted(out, key=lambda t: (len(t), t))


def sigma_mul(a: SigmaExpr, b: SigmaExpr) -> SigmaExpr:
    out: dict[Basis, Coefficient] = {}
    for t, ca in a.terms.items():
        for u, cb in b.terms.items():
            coeff = ca.values() * cb.values()
            for w, k in stuffle(t, u).items():
                c = Coefficient(coeff.scale_by(k) if k != 1 else coeff)
                out[w] = out[w] + c if w in out else c
    return SigmaExpr(a.sums, _prune(out), None, _minp(a.fit_precision, b.fit_precision))


# ------------------------------------------------------------------ the algebra
@dataclass
class RegularizedValue:
    value: PadicNumber
    weight: int
    composition: Composition
    kind: str  # "sigma" or "gamma"

    def to_json(self) -> dict:
        return {"kind": self.kind, "composition": self.composition.to_json(),
                "weight": self.weight, "value": self.value.to_json()}


class SigmaAlgebra:
    """Expansion, delta, projections and regularized values on one grid."""

    def __init__(self, sums: SumTables, degree: int = 8, threshold: int | None = None,
                 budget: PrecisionBudget | None = None, work_degree: int | None = None):
        self.sums = sums
        self.scale = sums.scale
        self.p = sums.p
        self.D = degree
        # Taylor splitting and limits use a higher degree: a head coefficient that is
        # off by eps leaks eps * sigma_p(t) into the empty-basis coefficient.
        if work_degree is None:
            work_degree = max(degree, min(40, self.scale.n_max // self.p - 8))
        self.work_degree = work_degree
        self.threshold = threshold
        self.budget = budget
        self._expansions: dict[Composition, SigmaExpr] = {}
        self._tilde: dict[Composition, PSF] = {}

    # -------------------------------------------------------------- helpers
    def _const(self, value: PadicNumber) -> PadicTable:
        return PadicTable.constant(self.scale, value.lift(self.scale.max_precision))

    def _taylor_head(self, f: PadicTable, s: int) -> tuple[list[PadicNumber], int | None]:
        """First s Taylor coefficients of f on the class p | n."""
        try:
            fit = fit_table(f, self.work_degree, self.threshold, residues=[0], budget=self.budget)
        except FitRejectedError as exc:
            raise ExpansionInconsistencyError(f"expansion inconsistency: {exc}") from exc
        coeffs = [fit.coeff(0, j) for j in range(s)]
        prec = fit.tail_valuation_bound
        return coeffs, prec

    def _g_type(self, phi: PadicTable, t: Basis, acc: dict, fp: list):
        """sum_{0<a<n} phi(a) sigma_p(t)(a)."""
        F_incl = phi.prefix_sum(inclusive=True)
        F_excl = phi.prefix_sum()
        _add(acc, t, Coefficient(F_excl))
        if t:
            self._h_type(F_incl, t[-1], t[:-1], acc, fp, sign=-1)

    def _h_type(self, f: PadicTable, s: int, t: Basis, acc: dict, fp: list, sign: int = 1):
        """sum_{0<a<n, p|a} f(a) a^{-s} sigma_p(t)(a)."""
        f0 = f.restrict(0)
        if s > 0:
            heads, prec = self._taylor_head(f0, s)
            fp.append(prec)
            rest = f0
            for j, b in enumerate(heads):
                if b.is_zero:
                    continue
                b = b.lift(self.scale.max_precision)
                tb = self._const(b)
                _add(acc, t + (s - j,), Coefficient(tb if sign > 0 else -tb))
                mono = PadicTable.power_mask(self.scale, -j, residue=0).scale_by(b)
                rest = rest - mono
            phi = rest.div_power(s)
        else:
            phi = f0
        if sign < 0:
            phi = -phi
        self._g_type(phi, t, acc, fp)

    # -------------------------------------------------------------- operations
    def expand_sigma(self, c: Composition) -> SigmaExpr:
        c = c.check(self.p)
        hit = self._expansions.get(c)
        if hit is not None:
            return hit
        if c.depth == 0:
            expr = SigmaExpr(self.sums, {(): Coefficient(PadicTable.constant(self.scale, 1))}, c)
        else:
            inner = self.expand_sigma(c.prefix())
            s, m = c.s[-1], c.m[-1]
            acc: dict[Basis, Coefficient] = {}
            fp: list = [inner.fit_precision]
            for t, coeff in inner.terms.items():
                f = coeff.values()
                if m != 0:
                    self._g_type(f.restrict(m).div_power(s), t, acc, fp)
                else:
                    self._h_type(f, s, t, acc, fp)
            bound = None
            for x in fp:
                bound = _minp(bound, x)
            expr = SigmaExpr(self.sums, _prune(acc), c, bound)
        self._expansions[c] = expr
        return expr

    def gamma_expr(self, c: Composition) -> SigmaExpr:
        """gamma(s; m) = n^{-s_k} [n = m_k] sigma(s'; m') as an element with Laurent coefficients."""
        if c.depth == 0:
            raise ValueError("gamma needs depth >= 1")
        inner = self.expand_sigma(c.prefix())
        s, m = c.s[-1], c.m[-1]
        terms = {}
        for t, coeff in inner.terms.items():
            tab = coeff.values().restrict(m)
            terms[t] = Coefficient(tab.div_power(s)) if m != 0 else Coefficient(tab, s)
        return SigmaExpr(self.sums, terms, c, inner.fit_precision)

    def delta(self, expr: SigmaExpr) -> SigmaExpr:
        """delta f(n) = f(n+p) - f(n) on n = 0 mod p, applied termwise."""
        p = self.p
        n_max = self.scale.n_max
        valid = [n for n in range(p, n_max + 1, p) if n + p <= n_max]
        keep = set(valid)

        def mask(t: PadicTable) -> PadicTable:
            return PadicTable(t.scale, [x if n in keep else 0 for n, x in enumerate(t.data)], t.prec)

        out: dict[Basis, Coefficient] = {}
        for t, coeff in expr.terms.items():
            a = coeff.values()
            a_next = a.shift(p)
            _add(out, t, Coefficient(mask(a_next - a)))
            if t:
                _add(out, t[:-1], Coefficient(mask(a_next.div_power(t[-1]))))
        return SigmaExpr(self.sums, out, None, expr.fit_precision)

    def delta_grid(self) -> list[int]:
        p, n_max = self.p, self.scale.n_max
        return [n for n in range(p, n_max + 1, p) if n + p <= n_max]

    def regularize_r(self, expr: SigmaExpr) -> LaurentPSF:
        """Fit the coefficient of sigma_p(()) (with its principal part when it has a pole)."""
        coeff = expr.terms.get(())
        if coeff is None:
            z = PadicNumber.zero(self.p, self.scale.max_precision)
            return LaurentPSF(PSF(self.p, tuple((z,) for _ in range(self.p))))
        residues = [i for i in range(self.p) if not coeff.table.restrict(i).is_zero()]
        try:
            f = fit_table(coeff.table, self.work_degree, self.threshold, residues=residues or [0],
                          budget=self.budget)
        except FitRejectedError as exc:
            raise RegularizationError(f"regularization failed: empty-basis coefficient not a PSF ({exc})") from exc
        if expr.fit_precision is not None:
            f = PSF(f.p, f.branches, _minp(f.tail_valuation_bound, expr.fit_precision), f.domain_start)
        return laurent_from_pole(f, coeff.pole, self.work_degree)

    def sigma_tilde(self, c: Composition) -> PSF:
        if c not in self._tilde:
            self._tilde[c] = self.regularize_r(self.expand_sigma(c)).psf
        return self._tilde[c]

    def gamma_tilde(self, c: Composition) -> PSF:
        return project_s(self.regularize_r(self.gamma_expr(c)))

    def sigma_bar(self, c: Composition) -> RegularizedValue:
        return RegularizedValue(psf_value_at_zero(self.sigma_tilde(c)), c.weight, c, "sigma")

    def gamma_bar(self, c: Composition) -> RegularizedValue:
        if c.m[-1] != 0:
            # gamma-tilde vanishes on the class p | n
            return RegularizedValue(PadicNumber.zero(self.p, self.scale.max_precision), c.weight, c, "gamma")
        f = self.sigma_tilde(c.prefix())
        return RegularizedValue(psf_taylor(f, c.s[-1]), c.weight, c, "gamma")

    # -------------------------------------------------------------- second route
    def regularize_by_collocation(self, c: Composition, degree: int = 24, step: int = 4) -> PadicNumber:
        """sigma-bar via a direct solve in the free basis on the class p | n.

        Unknowns are polynomial coefficients (in n/p) of P_t for every basis t
        dominated by s; the equations are the brute values
        sigma(c)(n) = sum_t P_t(n) sigma_p(t)(n) at the first multiples of p.
        The solve is repeated at ``degree + step``; the agreement of the two
        constant terms caps the reported precision.
        """
        lo = self._collocate(c, degree)
        hi = self._collocate(c, degree + step)
        d = hi - lo
        prec = hi.precision if d.is_zero else min(hi.precision, d.valuation)
        return hi.with_precision(prec)

    def _collocate(self, c: Composition, d: int) -> PadicNumber:
        from .linalg import padic_solve

        bases = dominated_bases(c.s)
        unknowns = [(t, j) for t in bases for j in range(d + 1)]
        p = self.p
        rows_n = [p * k for k in range(1, len(unknowns) + 1)]
        if rows_n[-1] > self.scale.n_max:
            raise ValueError("grid too small for collocation")
        target = self.sums.sigma(c)
        tabs = {t: self.sums.sigma_p(t) for t in bases}
        # powers of n/p keep the columns at comparable valuations
        A = [[tabs[t][n] * ((n // p) ** j) for (t, j) in unknowns] for n in rows_n]
        b = [target[n] for n in rows_n]
        x = padic_solve(A, b)
        return x[unknowns.index(((), 0))]


def _prune(terms: dict[Basis, Coefficient]) -> dict[Basis, Coefficient]:
    """Drop coefficients that vanish on the whole grid."""
    return {t: c for t, c in terms.items() if not c.table.is_zero()}


def _add(acc: dict, t: Basis, c: Coefficient):
    acc[t] = acc[t] + c if t in acc else c
