"""Frobenius recursion and p-adic multi-zeta values.

The Frobenius solution satisfies

    d gfrak = p (e_0 gfrak - gfrak e_0) omega_0 + e_1 gfrak omega_p - p gfrak (g^{-1} e_1 g) omega_1

and its value at infinity h is tied to g by (e_0 + e_1) h = h (e_0 + g^{-1} e_1 g).
Each gfrak{w} is carried as a finite combination of gamma-sequences with
polynomial coefficients in regularized values.  The coefficients of gfrak{w}
at n = p^j converge to minus its value at infinity, so h{w} is the negated
regularized limit; g is solved from the identity above weight by weight.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable

from .linalg import RationalSolver
from .oracle import EMPTY, Composition, SumTables, conjugate_e1, integrate_forms, ode_integrate_gfrak
from .padic import PadicError, PadicNumber, PrecisionBudget, from_rational, is_prime
from .sigma import SigmaAlgebra
from .tables import PadicTable, Scale, exact_scale
from .trace import Leaf, Poly
from .words import NCSeries, all_words, grouplike_residual, shuffle, words_of_weight, zeta_word

log = logging.getLogger(__name__)


class LimitNotDetectedError(PadicError):
    pass


class FundamentalIdentityError(PadicError):
    pass


class NonUniqueSolutionError(PadicError):
    pass


class AntiderivativeMismatchError(PadicError):
    pass


class WeightExceededError(ValueError):
    pass


# ------------------------------------------------------------------ gamma combinations
class GammaComb:
    """``sum c * gamma(comp)``; the empty composition stands for the unit sequence (1 at n = 0)."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Composition, Any] | None = None):
        self.terms = {}
        for comp, c in (terms or {}).items():
            self.add(comp, c)

    def add(self, comp: Composition, c) -> None:
        if _is_zero(c):
            return
        if comp in self.terms:
            c = self.terms[comp] + c
            if _is_zero(c):
                del self.terms[comp]
                return
        self.terms[comp] = c

    def __add__(self, other: "GammaComb") -> "GammaComb":
        out = GammaComb(self.terms)
        for comp, c in other.terms.items():
            out.add(comp, c)
        return out

    def __neg__(self) -> "GammaComb":
        return GammaComb({comp: -c for comp, c in self.terms.items()})

    def __sub__(self, other: "GammaComb") -> "GammaComb":
        return self + (-other)

    def scale(self, k) -> "GammaComb":
        return GammaComb({comp: c * k for comp, c in self.terms.items()})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def map(self, fn: Callable) -> "GammaComb":
        return GammaComb({comp: fn(c) for comp, c in self.terms.items()})

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return "GammaComb(" + ", ".join(f"{c}*g{comp}" for comp, c in sorted(self.terms.items())) + ")"


def _is_zero(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 0
    return c.is_zero


OMEGA_KINDS = ("omega0", "omega1", "omegap")


def antiderivative_coeffs(kind: str, comb: GammaComb, p: int) -> GammaComb:
    """Coefficients of f with df = omega * sum_n a_n z^n, a_n given by ``comb``.

    omega0: gamma(s; m) -> gamma(s_1..s_k + 1; m)
    omega1: gamma(s; m) -> -sum_i gamma(s, 1; m, i)
    omegap: gamma(s; m) -> -p gamma(s, 1; m, m_k)
    The unit behaves as gamma of the empty composition with m_k = 0.
    """
    out = GammaComb()
    for comp, c in comb.terms.items():
        if kind == "omega0":
            if comp.depth == 0:
                raise ValueError("omega_0 applied to a nonzero constant term has no power-series antiderivative")
            out.add(Composition(comp.s[:-1] + (comp.s[-1] + 1,), comp.m), c)
        elif kind == "omega1":
            for i in range(p):
                out.add(comp.append(1, i), -c)
        elif kind == "omegap":
            last = comp.m[-1] if comp.depth else 0
            out.add(comp.append(1, last), c * (-p))
        else:
            raise ValueError(f"unknown form {kind!r}")
    return out


def numeric_antiderivative(kind: str, table: PadicTable) -> PadicTable:
    """The same antiderivative by z-series integration of a coefficient table."""
    if kind == "omega0":
        return integrate_forms(table.scale, table, None, None)
    if kind == "omega1":
        return integrate_forms(table.scale, None, None, table)
    if kind == "omegap":
        return integrate_forms(table.scale, None, table, None)
    raise ValueError(f"unknown form {kind!r}")


def comb_table(comb: GammaComb, scale: Scale, value: Callable[[Any], Any] = lambda c: c) -> PadicTable:
    """Grid table of a combination, walking the prefix tree so no sum table is stored twice."""
    tree: dict = {}
    acc = PadicTable.zeros(scale)
    for comp, c in comb.terms.items():
        if comp.depth == 0:
            acc = acc + PadicTable.delta_at(scale, 0, 1).scale_by(value(c))
            continue
        node = tree
        for step in zip(comp.s, comp.m):
            node = node.setdefault(step, {})
        node[None] = c
    ones = PadicTable.constant(scale, 1)

    def walk(node: dict, sigma: PadicTable):
        nonlocal acc
        for step, child in node.items():
            if step is None:
                continue
            s, m = step
            gamma = sigma.restrict(m).div_power(s)
            if None in child:
                acc = acc + gamma.scale_by(value(child[None]))
            if len(child) > (None in child):
                walk(child, gamma.prefix_sum())

    walk(tree, ones)
    return acc


# ------------------------------------------------------------------ results
@dataclass
class LimitReport:
    word: str
    values: list[PadicNumber]
    increments: list[int]
    limit: PadicNumber
    passed: bool

    def to_json(self) -> dict:
        return {"word": self.word, "increments": self.increments, "passed": self.passed,
                "limit": self.limit.to_json()}


@dataclass
class ZetaValue:
    indices: tuple[int, ...]
    word: str
    value: PadicNumber
    trace: Poly
    weight: int

    def to_json(self, emit_trace: bool = True) -> dict:
        out = {"indices": list(self.indices), "word": self.word, "weight": self.weight,
               "value": self.value.to_json()}
        if emit_trace:
            out["trace"] = self.trace.to_json()
        return out


@dataclass
class FrobeniusSolution:
    p: int
    W: int
    g: NCSeries
    h: NCSeries
    g_trace: NCSeries
    h_trace: NCSeries
    gfrak: dict[str, GammaComb]
    leaf_values: dict[Leaf, PadicNumber]
    diagnostics: dict = field(default_factory=dict)

    def zeta(self, indices: Iterable[int]) -> ZetaValue:
        idx = tuple(indices)
        w = zeta_word(idx)
        if len(w) > self.W:
            raise WeightExceededError(f"weight {len(w)} exceeds the solved weight {self.W}")
        scale = Fraction(1, self.p ** len(w))
        val = self.g[w]
        val = val * from_rational(1, self.p ** len(w), self.p, val.precision + 64)
        return ZetaValue(idx, w, val, self.g_trace[w] * scale, len(w))


# ------------------------------------------------------------------ the engine
class FrobeniusEngine:
    """Weight-major solver for gfrak, h and g up to weight W."""

    def __init__(self, p: int = 5, N: int = 12, W: int = 4, D: int = 8, n_max: int | None = None,
                 j_max: int = 6, limit_tolerance: int | None = None, budget: PrecisionBudget | None = None,
                 check_tables: bool = True, check_limits: bool = True):
        if not is_prime(p) or p == 2:
            raise ValueError("p must be an odd prime")
        self.p, self.N, self.W, self.D = p, N, W, D
        self.n_max = p**5 if n_max is None else n_max
        self.j_max = j_max
        self.limit_tolerance = math.ceil(N / 2) if limit_tolerance is None else limit_tolerance
        self.budget = budget or PrecisionBudget(N)
        self.check_tables = check_tables
        self.check_limits = check_limits
        # regularization needs weight W + 1 (h one weight above g)
        self.scale = exact_scale(p, self.n_max, W + 2, N)
        self.sums = SumTables(self.scale)
        threshold = N - (_vp_factorial(D, p) + D + 2)
        self.alg = SigmaAlgebra(self.sums, D, threshold, self.budget)
        self.leaf_values: dict[Leaf, PadicNumber] = {}

    # -------------------------------------------------------------- leaves
    def leaf_value(self, leaf: Leaf) -> PadicNumber:
        v = self.leaf_values.get(leaf)
        if v is None:
            kind, comp = leaf
            rv = self.alg.sigma_bar(comp) if kind == "sigma" else self.alg.gamma_bar(comp)
            v = rv.value
            self.leaf_values[leaf] = v
        return v

    def regularized(self, comb: GammaComb) -> Poly:
        """The regularized limit of a combination as a polynomial in gamma-bar leaves.

        gamma-bar vanishes when m_k != 0 and for depth one with m = 0 (prefix is the constant 1).
        """
        out = Poly()
        for comp, c in comb.terms.items():
            if comp.depth == 0:
                out = out + c
            elif comp.m[-1] == 0 and comp.depth >= 2:
                out = out + c * Poly.leaf("gamma", comp)
        return out

    def h_coefficient(self, comb: GammaComb) -> Poly:
        """h[w] for a nonempty word from the z^n coefficients of gfrak[w].

        gfrak[w] is analytic off the residue disk of 1 and vanishes at 0, so its
        value at infinity is minus the limit of its coefficients at n = p^j.
        """
        return -self.regularized(comb)

    def evaluate(self, poly: Poly) -> PadicNumber:
        return poly.evaluate(self.leaf_value, self.p, self.scale.max_precision)

    # -------------------------------------------------------------- recursion
    def gfrak_word(self, word: str, G: dict[str, GammaComb], X: NCSeries) -> GammaComb:
        p = self.p
        A = GammaComb()
        if word[0] == "0":
            A = A + G[word[1:]].scale(p)
        if word[-1] == "0":
            A = A - G[word[:-1]].scale(p)
        out = antiderivative_coeffs("omega0", A, p)
        if word[0] == "1":
            out = out + antiderivative_coeffs("omegap", G[word[1:]], p)
        C = GammaComb()
        for k in range(len(word)):
            x = X[word[k:]]
            if _is_zero(x):
                continue
            C = C + G[word[:k]].scale(x * (-p))
        return out + antiderivative_coeffs("omega1", C, p)

    def _numeric_word(self, word: str, T: dict[str, PadicTable], Xn: NCSeries) -> PadicTable:
        """Same step by z-series integration of tables (the mandatory second path)."""
        p = self.p
        A = B = C = None
        if word[0] == "0":
            A = T[word[1:]].scale_by(p)
        if word[-1] == "0":
            t = T[word[:-1]].scale_by(p)
            A = -t if A is None else A - t
        if word[0] == "1":
            B = T[word[1:]]
        for k in range(len(word)):
            x = Xn[word[k:]]
            if isinstance(x, int) or x.is_zero:
                continue
            term = T[word[:k]].scale_by(x * (-p))
            C = term if C is None else C + term
        return integrate_forms(self.scale, A, B, C)

    # -------------------------------------------------------------- g from h
    def _solve_weight(self, Wp: int, g: NCSeries, h: NCSeries) -> tuple[dict[str, Poly], list, int]:
        """Unknowns g[w], |w| = Wp, from the identity at weight Wp + 1 plus shuffle relations."""
        unknowns = words_of_weight(Wp)
        index = {w: i for i, w in enumerate(unknowns)}
        X = conjugate_e1(NCSeries(g.coeffs, Wp + 1))
        rows: list[list[int]] = []
        rhs: list[Poly] = []
        tags: list[str] = []
        for w in words_of_weight(Wp + 1):
            e0 = h[w[1:]] - (h[w[:-1]] if w[-1] == "0" else 0)
            for k in range(len(w)):
                e0 = e0 - h[w[:k]] * X[w[k:]]
            row = [0] * len(unknowns)
            if w[0] == "1":
                row[index[w[1:]]] += 1
            if w[-1] == "1":
                row[index[w[:-1]]] -= 1
            rows.append(row)
            rhs.append(_as_poly(e0))
            tags.append(f"identity:{w}")
        words = [u for u in all_words(Wp - 1) if u]
        for i, u in enumerate(words):
            for v in words[i:]:
                if len(u) + len(v) != Wp:
                    continue
                row = [0] * len(unknowns)
                for x, k in shuffle(u, v).items():
                    row[index[x]] += k
                rows.append(row)
                rhs.append(_as_poly(g[u] * g[v]))
                tags.append(f"shuffle:{u}|{v}")
        if Wp == 1:
            row = [0] * len(unknowns)
            row[index["1"]] = 1
            rows.append(row)
            rhs.append(Poly())
            tags.append("g[e1]=0")
        solver = RationalSolver.build(rows)
        if not solver.unique:
            free = [unknowns[j] for j in solver.free_unknowns()]
            raise NonUniqueSolutionError(f"g not determined at weight {Wp}: free coefficients {free}")
        sol = solver.apply(rhs, Poly())
        residuals = solver.residuals(rhs, Poly())
        return {w: sol[i] for i, w in enumerate(unknowns)}, residuals, solver.rank

    # -------------------------------------------------------------- driver
    def solve(self) -> FrobeniusSolution:
        p, W = self.p, self.W
        one = Poly.const(1)
        g = NCSeries({"": one}, W + 1)
        h = NCSeries({"": one}, W + 1)
        G: dict[str, GammaComb] = {"": GammaComb({EMPTY: one})}
        diag: dict = {"identity_residuals": {}, "ranks": {}, "provisional_h_mismatch": []}
        provisional: dict[str, Poly] = {}
        for Wp in range(1, W + 1):
            X = conjugate_e1(NCSeries(g.coeffs, Wp))
            for w in words_of_weight(Wp):
                G[w] = self.gfrak_word(w, G, X)
                h[w] = self.h_coefficient(G[w])
                if w in provisional and provisional[w] != h[w]:
                    diag["provisional_h_mismatch"].append(w)
            # one weight up with the unknown weight-Wp part of g left at zero:
            # it only enters through regularized values that vanish
            Xn = conjugate_e1(NCSeries(g.coeffs, Wp + 1))
            Gn = dict(G)
            for w in words_of_weight(Wp + 1):
                Gn[w] = self.gfrak_word(w, Gn, Xn)
                h[w] = provisional[w] = self.h_coefficient(Gn[w])
            sol, residuals, rank = self._solve_weight(Wp, g, h)
            diag["ranks"][Wp] = rank
            for w, val in sol.items():
                g[w] = val
            diag["identity_residuals"][Wp] = residuals
            log.info("weight %d solved (%d gfrak words)", Wp, len(G))
        h = NCSeries({w: c for w, c in h.coeffs.items() if len(w) <= W}, W)
        g_num = NCSeries({w: self.evaluate(c) for w, c in g.coeffs.items()}, W)
        h_num = NCSeries({w: self.evaluate(c) for w, c in h.coeffs.items()}, W)
        g_poly = NCSeries(dict(g.coeffs), W)
        gfrak = {w: c for w, c in G.items() if len(w) <= W}
        solution = FrobeniusSolution(p, W, g_num, h_num, g_poly, h, gfrak, self.leaf_values, diag)
        self._diagnose(solution)
        if self.check_tables:
            self.check_oracle(solution)
        if self.check_limits:
            self.check_cauchy(solution)
        return solution

    # -------------------------------------------------------------- checks
    def _diagnose(self, sol: FrobeniusSolution):
        diag = sol.diagnostics
        if diag["provisional_h_mismatch"]:
            raise FundamentalIdentityError(
                f"fundamental identity violated: h changed after g was solved at {diag['provisional_h_mismatch']}")
        # overdetermination residuals, evaluated
        worst = None
        res_report = {}
        for Wp, polys in diag["identity_residuals"].items():
            vals = [self.evaluate(r) for r in polys]
            res_report[Wp] = [_val(v) for v in vals]
            for v in vals:
                worst = _vmin(worst, _val(v))
        diag["identity_residuals"] = res_report
        diag["identity_residual_min_valuation"] = worst
        diag["identity_full"] = self.identity_residuals(sol)
        diag["grouplike_g"] = _grouplike_min(sol.g)
        diag["grouplike_h"] = _grouplike_min(sol.h)
        diag["trace_weights_ok"] = all(sol.g_trace[w].is_homogeneous(len(w)) for w in sol.g_trace.coeffs) and \
            all(sol.h_trace[w].is_homogeneous(len(w)) for w in sol.h_trace.coeffs)
        diag["precision"] = {"g": min(v.precision for v in sol.g.coeffs.values()),
                             "h": min(v.precision for v in sol.h.coeffs.values())}
        tol = self.N
        if worst is not None and worst < tol:
            raise FundamentalIdentityError(
                f"fundamental identity violated: residual valuation {worst} < {tol}")

    def check_oracle(self, sol: FrobeniusSolution) -> dict[str, int]:
        """Symbolic antiderivatives against z-series integration, every word; hard error on mismatch."""
        sym, num = self.grid_tables(sol)
        report = {}
        for w in sym:
            d = sym[w] - num[w]
            prec = min(sym[w].prec, num[w].prec)
            if d.vmin() < prec:
                raise AntiderivativeMismatchError(
                    f"symbolic and integrated tables differ for word {w!r} at valuation {d.vmin()} < {prec}")
            report[w] = prec
        sol.diagnostics["oracle_tables"] = report
        return report

    def check_cauchy(self, sol: FrobeniusSolution) -> dict[str, LimitReport]:
        """Cauchy test at n = p^j for every word and agreement of the limit with -h."""
        reports = self.limits(sol)
        failed = {w: r.increments for w, r in reports.items() if not r.passed}
        if failed:
            raise LimitNotDetectedError(f"limit not detected at precision {self.N}: increments {failed}")
        agree = {}
        for w, r in reports.items():
            d = r.limit + sol.h[w]
            agree[w] = d.precision if d.is_zero else d.valuation
            if agree[w] < self.limit_tolerance:
                raise LimitNotDetectedError(
                    f"limit of word {w!r} disagrees with the regularized value at valuation {agree[w]}")
        sol.diagnostics["limits"] = {w: r.increments for w, r in reports.items()}
        sol.diagnostics["limit_vs_h"] = agree
        return reports

    def identity_residuals(self, sol: FrobeniusSolution) -> dict[str, int | None]:
        """Valuations of (e_0 + e_1) h - h (e_0 + g^{-1} e_1 g) on every word of weight <= W."""
        g, h = sol.g, sol.h
        X = conjugate_e1(g)
        out = {}
        for w in all_words(sol.W)[1:]:
            e = h[w[1:]] - (h[w[:-1]] if w[-1] == "0" else 0)
            for k in range(len(w)):
                x = X[w[k:]]
                if isinstance(x, int) and x == 0:
                    continue
                e = e - h[w[:k]] * x
            out[w] = _val(e) if isinstance(e, PadicNumber) else None
        return out

    def grid_tables(self, sol: FrobeniusSolution) -> tuple[dict[str, PadicTable], dict[str, PadicTable]]:
        """Tables of every gfrak word two ways: from the combinations and by integration.

        g values are lifted (their digits are treated as exact inputs) so the two
        paths are compared exactly.
        """
        lift = self.scale.max_precision
        gl = NCSeries({w: v.lift(lift) for w, v in sol.g.coeffs.items()}, sol.W)
        Xn = conjugate_e1(gl)
        G: dict[str, GammaComb] = {"": GammaComb({EMPTY: from_rational(1, 1, self.p, lift)})}
        sym: dict[str, PadicTable] = {}
        num: dict[str, PadicTable] = {"": PadicTable.delta_at(self.scale, 0, 1)}
        for w in all_words(sol.W):
            if w:
                G[w] = self.gfrak_word(w, G, Xn)
                num[w] = self._numeric_word(w, num, Xn)
            sym[w] = comb_table(G[w], self.scale) if w else num[""]
        return sym, num

    def oracle_tables(self, sol: FrobeniusSolution, n_max: int) -> dict[str, PadicTable]:
        scale = exact_scale(self.p, n_max, sol.W, self.N)
        lift = scale.max_precision
        g_lower = NCSeries({w: v.lift(lift) for w, v in sol.g.coeffs.items() if len(w) < sol.W}, sol.W)
        return ode_integrate_gfrak(sol.W, g_lower, scale, self.budget)

    def limits(self, sol: FrobeniusSolution, tables: dict[str, PadicTable] | None = None) -> dict[str, LimitReport]:
        """Cauchy test of gfrak{w}(p^j), j <= j_max, for every word."""
        p = self.p
        if tables is None:
            tables = self.oracle_tables(sol, p**self.j_max)
        out = {}
        for w in all_words(sol.W)[1:]:
            t = tables[w]
            vals = [t[p**j] for j in range(1, self.j_max + 1)]
            inc = []
            for a, b in zip(vals, vals[1:]):
                d = b - a
                inc.append(d.precision if d.is_zero else d.valuation)
            last = inc[-2:] if len(inc) >= 2 else inc
            passed = all(x >= self.limit_tolerance for x in last)
            lim = vals[-1].with_precision(inc[-1])
            out[w] = LimitReport(w, vals, inc, lim, passed)
        return out


def _as_poly(x) -> Poly:
    return x if isinstance(x, Poly) else Poly.const(x)


def _val(x: PadicNumber) -> int:
    return x.precision if x.is_zero else x.valuation


def _vmin(a, b):
    return b if a is None else min(a, b)


def _vp_factorial(n: int, p: int) -> int:
    out, q = 0, p
    while q <= n:
        out += n // q
        q *= p
    return out


def _grouplike_min(a: NCSeries) -> int | None:
    worst = None
    for r in grouplike_residual(a).values():
        if isinstance(r, PadicNumber):
            worst = _vmin(worst, _val(r))
    return worst


# ------------------------------------------------------------------ closed forms
def seed_depth1_gfrak(p: int, s: int) -> GammaComb:
    """gfrak{e_0^{s-1} e_1} = p^s sum_{0<i<p} gamma(s; i)."""
    return GammaComb({Composition((s,), (i,)): p**s for i in range(1, p)})


def depth2_gfrak(p: int, s: int) -> GammaComb:
    """gfrak{e_1 e_0^{s-1} e_1} from the depth-two closed form."""
    out = GammaComb()
    sign = (-1) ** (s + 1)
    for i in range(1, p):
        for j in range(p):
            out.add(Composition((s, 1), (i, j)), sign * p ** (s + 1))
        out.add(Composition((s, 1), (i, i)), -(p ** (s + 1)))
    return out


def seed_depth1_g(p: int, s: int) -> Poly:
    """g[e_0^{s-1} e_1] = p^s/(s-1) * sum_{0<i<p} (first Taylor coefficient of sigma(s-1; i)); g[e_1] = 0."""
    if s == 1:
        return Poly()
    out = Poly()
    for i in range(1, p):
        out = out + Poly.leaf("gamma", Composition((s - 1, 1), (i, 0)))
    return out * Fraction(p**s, s - 1)
