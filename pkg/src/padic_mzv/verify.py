"""Invariant suite: every symbolic step against a brute-force or second-path oracle.

Each check returns a :class:`Check` carrying the worst residual valuation it
saw next to the tolerance it was held to, so reports stay comparable across
primes and precisions.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .mzv import (FrobeniusEngine, FrobeniusSolution, GammaComb, _vp_factorial, antiderivative_coeffs,
                  comb_table, depth2_gfrak, numeric_antiderivative, seed_depth1_gfrak)
from .oracle import Composition, SumTables, brute_sigma_exact
from .padic import PadicNumber, PrecisionBudget, from_rational
from .psf import fit_nodes, fit_table, psf_taylor
from .sigma import SigmaAlgebra, sigma_mul, stuffle_compositions
from .tables import PadicTable, exact_scale
from .trace import Poly
from .words import all_words, grouplike_residual


@dataclass
class Check:
    name: str
    passed: bool
    worst: int | None = None
    tolerance: int | None = None
    cases: int = 0
    detail: dict = field(default_factory=dict)
    gating: bool = True

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "gating": self.gating, "cases": self.cases,
                "worst_valuation": self.worst, "tolerance": self.tolerance, "detail": self.detail}


def _val(x: PadicNumber) -> int:
    return x.precision if x.is_zero else x.valuation


def _exact_gap(a: PadicTable, b: PadicTable, ns=None) -> tuple[int, int]:
    """(valuation of a - b, precision both are known to) over ``ns`` or the whole grid."""
    d = a - b
    prec = min(a.prec, b.prec)
    if ns is None:
        return d.vmin(), prec
    vals = [d[n] for n in ns]
    return min((_val(v) for v in vals), default=prec), prec


# ------------------------------------------------------------------ composition sets
def grid_compositions(p: int, max_weight: int = 6, max_depth: int = 3, count: int = 40,
                      seed: int = 0) -> list[Composition]:
    """A deterministic spread of compositions: every exponent shape, residues varied."""
    rng = random.Random(seed)
    shapes = [s for d in range(1, max_depth + 1) for s in itertools.product(range(0, max_weight + 1), repeat=d)
              if 1 <= sum(s) <= max_weight and s[-1] >= 1]
    out: list[Composition] = []
    for s in shapes:
        m = tuple(rng.randrange(p) for _ in s)
        out.append(Composition(s, m))
    rng.shuffle(out)
    # all-zero and all-nonzero residue cases are the extremes of the expansion
    out = sorted(out[: max(count, 1) - 4], key=lambda c: (c.weight, c.depth))
    out += [Composition((1, 1), (0, 0)), Composition((2, 1), (1, 1)),
            Composition((1, 2, 1), (0, 1, 0)), Composition((3,), (0,))]
    return out


def regularization_compositions(p: int, count: int = 20, seed: int = 4) -> list[Composition]:
    """Weight <= 4 cases for the two regularization routes, zero residues included."""
    rng = random.Random(seed)
    shapes = [(1,), (2,), (3,), (4,), (1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1), (1, 1, 1), (1, 1, 2)]
    out = []
    while len(out) < count:
        s = shapes[len(out) % len(shapes)]
        c = Composition(s, tuple(rng.randrange(p) for _ in s))
        if c not in out:
            out.append(c)
    return out


def derivative_compositions(p: int) -> list[Composition]:
    """Compositions with every residue nonzero, where sigma-tilde equals sigma."""
    out = []
    for s in [(1,), (2,), (3,), (1, 1), (1, 2), (2, 1)]:
        for r in range(1, p):
            out.append(Composition(s, tuple(((r + k) % (p - 1)) + 1 for k in range(len(s)))))
    return out


# ------------------------------------------------------------------ sigma-level checks
class SigmaChecks:
    def __init__(self, p: int = 5, N: int = 12, D: int = 8, n_max: int | None = None, weight: int = 6,
                 budget: PrecisionBudget | None = None):
        self.p, self.N, self.D = p, N, D
        self.budget = budget or PrecisionBudget(N)
        self.n_max = p**5 if n_max is None else n_max
        self.scale = exact_scale(p, self.n_max, weight + 1, N)
        self.sums = SumTables(self.scale)
        self.threshold = N - (_vp_factorial(D, p) + D + 2)
        self.alg = SigmaAlgebra(self.sums, D, self.threshold, self.budget)

    def grid_identity(self, comps: list[Composition], spot: int = 6) -> Check:
        """Expansion against the streaming sum table on the whole grid, and that table against exact sums."""
        worst, detail = None, {}
        ok = True
        rng = random.Random(1)
        for c in comps:
            gap, prec = _exact_gap(self.alg.expand_sigma(c).table(), self.sums.sigma(c))
            exact = gap >= prec
            for n in rng.sample(range(1, min(self.n_max, 400) + 1), spot):
                q = brute_sigma_exact(c, n, self.p)
                ref = from_rational(q.numerator, q.denominator, self.p, prec + 8)
                d = self.sums.sigma(c)[n] - ref
                exact = exact and _val(d) >= min(prec, d.precision)
            ok = ok and exact
            detail[str(c)] = gap
            worst = gap if worst is None else min(worst, gap)
        return Check("grid_identity", ok, worst, None, len(comps), detail)

    def delta_identity(self, max_weight: int = 5) -> Check:
        p = self.p
        ns = self.alg.delta_grid()
        ok, worst, cases = True, None, 0
        for d in range(1, max_weight + 1):
            for s in itertools.product(range(1, max_weight + 1), repeat=d):
                if sum(s) > max_weight:
                    continue
                full, pre = self.sums.sigma_p(s), self.sums.sigma_p(s[:-1])
                lhs = full.shift(p) - full
                rhs = pre.div_power(s[-1])
                gap, prec = _exact_gap(lhs, rhs, ns)
                # the same difference read off the expansion termwise
                dexp = self.alg.delta(self.alg.expand_sigma(Composition.basis(s))).table()
                gap2, prec2 = _exact_gap(dexp, rhs, ns)
                ok = ok and gap >= prec and gap2 >= prec2
                worst = min(x for x in (worst, gap, gap2) if x is not None)
                cases += 1
        return Check("delta_identity", ok, worst, None, cases)

    def quasi_shuffle(self, n_random: int = 20, seed: int = 2) -> Check:
        S = self.sums
        lhs = S.sigma_p((1,)) * S.sigma_p((1,))
        rhs = S.sigma_p((1, 1)).scale_by(2) + S.sigma_p((2,))
        gap, prec = _exact_gap(lhs, rhs)
        ok, worst = gap >= prec, gap
        rng = random.Random(seed)
        for _ in range(n_random):
            a = _random_comp(rng, self.p, 3, 2)
            b = _random_comp(rng, self.p, 3, 2)
            prod = S.sigma(a) * S.sigma(b)
            acc = PadicTable.zeros(self.scale)
            for c, k in stuffle_compositions(a, b).items():
                acc = acc + S.sigma(c).scale_by(k)
            g1, p1 = _exact_gap(prod, acc)
            g2, p2 = _exact_gap(sigma_mul(self.alg.expand_sigma(a), self.alg.expand_sigma(b)).table(), prod)
            ok = ok and g1 >= p1 and g2 >= p2
            worst = min(worst, g1, g2)
        return Check("quasi_shuffle", ok, worst, None, n_random + 1)

    def psf_fit(self, max_s: int = 4, holdout: int = 10) -> Check:
        p, tol = self.p, self.threshold
        ok, worst, detail = True, None, {}
        for s in range(1, max_s + 1):
            for i in range(1, p):
                c = Composition((s,), (i,))
                f = fit_table(self.sums.sigma(c), self.D, tol, residues=[i])
                ns = _holdout(p, i, self.D, self.n_max, holdout)
                res = []
                for n in ns:
                    q = brute_sigma_exact(c, n, p)
                    pred = _branch_value(f, n)
                    res.append(_val(pred - from_rational(q.numerator, q.denominator, p, pred.precision + 8)))
                lim = _val(self.alg.sigma_bar(c).value)
                ok = ok and len(ns) >= holdout and min(res) >= tol and lim >= tol
                detail[str(c)] = {"holdout_min": min(res), "limit_at_zero": lim, "holdout_points": len(ns)}
                worst = min(x for x in (worst, min(res), lim) if x is not None)
        return Check("psf_fit", ok, worst, tol, len(detail), detail)

    def two_path(self, comps: list[Composition], tolerance: int | None = None) -> Check:
        tol = self.N if tolerance is None else tolerance
        ok, worst, detail = True, None, {}
        for c in comps:
            a = self.alg.sigma_bar(c).value
            b = self.alg.regularize_by_collocation(c)
            gap = _val(a - b)
            detail[str(c)] = gap
            ok = ok and gap >= tol
            worst = gap if worst is None else min(worst, gap)
        return Check("two_path_regularization", ok, worst, tol, len(comps), detail)

    def derivative_identity(self, comps: list[Composition], tolerance: int | None = None) -> Check:
        """First derivative of sigma-tilde at 0 against the appended-composition value."""
        tol = self.N if tolerance is None else tolerance
        ok, worst, detail = True, None, {}
        for c in comps:
            t1 = psf_taylor(self.alg.sigma_tilde(c), 1)
            sb = self.alg.sigma_bar(c.append(1, 0)).value
            gb = self.alg.gamma_bar(c.append(1, 0)).value
            gap = min(_val(t1 + sb), _val(t1 - gb))
            detail[str(c)] = gap
            ok = ok and gap >= tol
            worst = gap if worst is None else min(worst, gap)
        return Check("derivative_identity", ok, worst, tol, len(comps), detail)


def _branch_value(f, n: int) -> PadicNumber:
    return f(n)


def _holdout(p: int, i: int, D: int, n_max: int, count: int) -> list[int]:
    """Class-i points outside the interpolation nodes: p-power offsets, then a fixed random spread."""
    used = set(fit_nodes(p, i, D))
    out = [i + p**j for j in range(2, 12) if i + p**j <= n_max and i + p**j not in used]
    rng = random.Random(i)
    pool = [n for n in range(i, n_max + 1, p) if n not in used and n not in out]
    out += rng.sample(pool, max(0, count - len(out)))
    return sorted(out)


def _random_comp(rng: random.Random, p: int, max_weight: int, max_depth: int) -> Composition:
    while True:
        d = rng.randint(1, max_depth)
        s = tuple(rng.randint(1, max_weight) for _ in range(d))
        if sum(s) <= max_weight:
            return Composition(s, tuple(rng.randrange(p) for _ in range(d)))


# ------------------------------------------------------------------ engine checks
def random_gamma_comb(rng: random.Random, p: int, max_weight: int = 3, terms: int = 3) -> GammaComb:
    out = GammaComb()
    for _ in range(terms):
        out.add(_random_comp(rng, p, max_weight, 2), rng.randint(-9, 9) or 1)
    return out


def antiderivative_check(engine: FrobeniusEngine, n_random: int = 10, seed: int = 3) -> Check:
    rng = random.Random(seed)
    scale = engine.scale
    ok, worst, cases = True, None, 0
    for kind in ("omega0", "omega1", "omegap"):
        for _ in range(n_random):
            comb = random_gamma_comb(rng, engine.p)
            sym = comb_table(antiderivative_coeffs(kind, comb, engine.p), scale)
            num = numeric_antiderivative(kind, comb_table(comb, scale))
            gap, prec = _exact_gap(sym, num)
            ok = ok and gap >= prec
            worst = gap if worst is None else min(worst, gap)
            cases += 1
    return Check("antiderivative", ok, worst, None, cases)


def closed_form_check(engine: FrobeniusEngine, sol: FrobeniusSolution, max_s: int = 3) -> Check:
    p, scale = engine.p, engine.scale
    value = lambda c: engine.evaluate(c) if isinstance(c, Poly) else c
    ok, worst, detail = True, None, {}
    for s in range(1, min(max_s, sol.W) + 1):
        w = "0" * (s - 1) + "1"
        got = comb_table(sol.gfrak[w], scale, value)
        ref = comb_table(seed_depth1_gfrak(p, s), scale)
        direct = PadicTable.from_function(scale, lambda n: Fraction(p**s, n**s) if n % p else 0)
        g1, p1 = _exact_gap(got, ref)
        g2, p2 = _exact_gap(got, direct)
        detail[w] = min(g1, g2)
        ok = ok and g1 >= p1 and g2 >= p2
        if s + 1 <= sol.W:
            w2 = "1" + w
            got2 = comb_table(sol.gfrak[w2], scale, value)
            g3, p3 = _exact_gap(got2, comb_table(depth2_gfrak(p, s), scale))
            detail[w2] = g3
            ok = ok and g3 >= p3
        worst = min(detail.values())
    return Check("closed_forms", ok, worst, None, len(detail), detail)


def oracle_check(engine: FrobeniusEngine, sol: FrobeniusSolution) -> Check:
    """Symbolic gfrak tables against the independent ODE integration, every word."""
    oracle = engine.oracle_tables(sol, engine.n_max)
    sym, num = engine.grid_tables(sol)
    ok, worst, detail = True, None, {}
    for w in all_words(sol.W)[1:]:
        a, b = sym[w], oracle[w]
        prec = min(a.prec, b.prec)
        gap = min((_val(a[n] - b[n]) for n in range(1, engine.n_max + 1)), default=prec)
        g2, p2 = _exact_gap(a, num[w])
        detail[w] = gap
        ok = ok and gap >= prec and g2 >= p2
        worst = gap if worst is None else min(worst, gap)
    return Check("oracle_equivalence", ok, worst, None, len(detail), detail)


def limits_check(engine: FrobeniusEngine, sol: FrobeniusSolution) -> Check:
    reports = engine.limits(sol)
    tol = engine.limit_tolerance
    detail = {w: r.increments for w, r in reports.items()}
    finals = [r.increments[-1] for r in reports.values()]
    h0 = sol.h["0"]
    ok = all(r.passed for r in reports.values()) and min(finals) >= tol and h0.is_zero
    agree = min(_val(r.limit + sol.h[w]) for w, r in reports.items())
    ok = ok and agree >= tol
    return Check("limits", ok, min(finals), tol, len(reports),
                 {"increments": detail, "limit_plus_h_min": agree, "h[e0]_zero": h0.is_zero})


def identity_check(engine: FrobeniusEngine, sol: FrobeniusSolution) -> Check:
    loss = engine.budget.total_loss
    # the loss log sums every fit on the grid, so hold the residual to N itself (stricter)
    tol = engine.N
    full = engine.identity_residuals(sol)
    vals = [v for v in full.values() if v is not None]
    gl_g = _grouplike_worst(sol.g)
    gl_h = _grouplike_worst(sol.h)
    worst = min(vals + [gl_g, gl_h])
    ok = worst >= tol and sol.g["0"].is_zero and sol.g["1"].is_zero
    return Check("fundamental_identity", ok, worst, tol, len(vals),
                 {"identity_min": min(vals), "grouplike_g": gl_g, "grouplike_h": gl_h, "logged_loss": loss})


def _grouplike_worst(a) -> int:
    vals = [_val(r) for r in grouplike_residual(a).values() if isinstance(r, PadicNumber)]
    return min(vals) if vals else 10**9


def trace_check(engine: FrobeniusEngine, sol: FrobeniusSolution) -> Check:
    """Every zeta trace re-evaluates, from freshly computed leaves, to the emitted value."""
    fresh = FrobeniusEngine(engine.p, engine.N, engine.W, engine.D, engine.n_max, engine.j_max,
                            check_tables=False, check_limits=False)
    ok, worst, detail = True, None, {}
    for w in all_words(sol.W)[1:]:
        if not w.endswith("1"):
            continue
        z = sol.zeta(_indices(w))
        poly = Poly.from_json(z.trace.to_json())
        homogeneous = poly.is_homogeneous(len(w))
        again = poly.evaluate(fresh.leaf_value, engine.p, engine.scale.max_precision)
        gap = _val(again - z.value)
        prec = min(again.precision, z.value.precision)
        detail[w] = {"gap": gap, "homogeneous": homogeneous, "leaves": len(poly.leaves())}
        ok = ok and homogeneous and gap >= prec
        worst = gap if worst is None else min(worst, gap)
    return Check("trace_membership", ok, worst, None, len(detail), detail)


def _indices(word: str) -> tuple[int, ...]:
    return tuple(len(b) + 1 for b in word.split("1")[:-1])


def zeta_sanity(sol: FrobeniusSolution, N: int) -> list[Check]:
    z1 = sol.zeta((1,)).value
    out = [Check("zeta_1_zero", z1.is_zero, _val(z1), None, 1)]
    if sol.W >= 2:
        z2 = sol.zeta((2,)).value
        flag = z2.is_zero or z2.valuation >= N
        out.append(Check("zeta_2_near_zero", flag, _val(z2), N, 1,
                         {"note": "literature cross-check, not a gate"}, gating=False))
    return out


# ------------------------------------------------------------------ driver
def sigma_suite(p: int = 5, N: int = 12, D: int = 8, n_max: int | None = None,
                grid_cases: int = 40, quick: bool = False) -> tuple[list[Check], dict]:
    sig = SigmaChecks(p, N, D, n_max, weight=6)
    comps = grid_compositions(p, count=8 if quick else grid_cases)
    checks = [sig.grid_identity(comps),
              sig.delta_identity(4 if quick else 5),
              sig.quasi_shuffle(5 if quick else 20),
              sig.psf_fit(2 if quick else 4),
              sig.two_path(regularization_compositions(p, 6 if quick else 20)),
              sig.derivative_identity(derivative_compositions(p)[: 4 if quick else 10])]
    return checks, sig.budget.report()


def engine_suite(p: int = 5, N: int = 12, W: int = 4, D: int = 8, n_max: int | None = None, j_max: int = 6,
                 quick: bool = False) -> tuple[list[Check], dict]:
    engine = FrobeniusEngine(p, N, W, D, n_max, j_max, check_tables=False, check_limits=False)
    out = [antiderivative_check(engine, 3 if quick else 10)]
    sol = engine.solve()
    out += [closed_form_check(engine, sol), oracle_check(engine, sol), limits_check(engine, sol),
            identity_check(engine, sol), trace_check(engine, sol)]
    return out + zeta_sanity(sol, N), engine.budget.report()


@dataclass
class SuiteResult:
    checks: list[Check]
    precision_loss: dict

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if c.gating and not c.passed]


def run_suite(p: int = 5, N: int = 12, W: int = 4, D: int = 8, n_max: int | None = None, j_max: int = 6,
              grid_cases: int = 40, quick: bool = False, workers: int = 1) -> SuiteResult:
    """All invariants for one configuration; the two halves are independent and may run in parallel."""
    jobs = [(sigma_suite, (p, N, D, n_max, grid_cases, quick)),
            (engine_suite, (p, N, W, D, n_max, j_max, quick))]
    if workers <= 1:
        parts = [fn(*args) for fn, args in jobs]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            futures = [pool.submit(fn, *args) for fn, args in jobs]
            parts = [f.result() for f in futures]
    checks = [c for part, _ in parts for c in part]
    return SuiteResult(checks, {"sigma": parts[0][1], "engine": parts[1][1]})
