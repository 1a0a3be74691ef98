import pytest

from padic_mzv.mzv import (FrobeniusEngine, LimitNotDetectedError, WeightExceededError, comb_table,
                           depth2_gfrak, seed_depth1_g, seed_depth1_gfrak)
from padic_mzv.oracle import Composition
from padic_mzv.padic import PadicNumber
from padic_mzv.tables import PadicTable
from padic_mzv.trace import Poly

N = 12


def digits(x: PadicNumber) -> int:
    return x.precision if x.is_zero else x.valuation


def numeric(engine):
    return lambda c: engine.evaluate(c) if isinstance(c, Poly) else c


def test_weight_one_coefficients_vanish(engine4):
    _, sol = engine4
    assert sol.g["0"].is_zero and sol.g["1"].is_zero
    assert sol.h["0"].is_zero and sol.h_trace["0"].is_zero
    assert sol.zeta((1,)).value.is_zero


def test_solution_is_unique_at_every_weight(engine4):
    _, sol = engine4
    assert sol.diagnostics["ranks"] == {1: 2, 2: 4, 3: 8, 4: 16}


@pytest.mark.parametrize("s", [2, 3, 4])
def test_depth_one_g_matches_closed_form(engine4, s):
    engine, sol = engine4
    w = "0" * (s - 1) + "1"
    # the traces may differ by relations among regularized values; the numbers may not
    assert sol.g_trace[w].is_homogeneous(s)
    assert digits(sol.g[w] - engine.evaluate(seed_depth1_g(5, s))) >= N


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_depth_one_gfrak_is_the_seed(engine4, s):
    engine, sol = engine4
    w = "0" * (s - 1) + "1"
    tab = comb_table(sol.gfrak[w], engine.scale, numeric(engine))
    assert tab.equals(comb_table(seed_depth1_gfrak(5, s), engine.scale))
    for n in (7, 24, 3124):
        assert tab[n].equals(PadicNumber(5, s, 1, 64) / n**s, N)


def test_depth_two_closed_form_p3(engine3_p3):
    engine, sol = engine3_p3
    for s, w in [(1, "11"), (2, "101")]:
        got = comb_table(sol.gfrak[w], engine.scale, numeric(engine))
        assert got.equals(comb_table(depth2_gfrak(3, s), engine.scale))


def test_tables_match_ode_integration(engine4):
    engine, sol = engine4
    report = engine.check_oracle(sol)
    assert len(report) == 31


def test_h_is_minus_the_limit(engine4):
    engine, sol = engine4
    # independent tables: p^2 times the sum of gamma(2; i) over 0 < i < p, straight from the brute sums
    p = 5
    acc = None
    for i in range(1, p):
        t = engine.sums.gamma(Composition((2,), (i,))).scale_by(p**2)
        acc = t if acc is None else acc + t
    # at n = p^j only the class p | n is hit, so the sequence is zero and so is its limit
    assert all(acc[p**j].is_zero for j in range(1, 6))
    assert digits(sol.h["01"]) >= engine.limit_tolerance
    reports = engine.limits(sol)
    assert all(r.passed for r in reports.values())
    for w, r in reports.items():
        assert digits(r.limit + sol.h[w]) >= engine.limit_tolerance


def test_grouplike_and_identity(engine4):
    _, sol = engine4
    d = sol.diagnostics
    assert d["grouplike_g"] >= N and d["grouplike_h"] >= N
    assert min(v for v in d["identity_full"].values() if v is not None) >= N


def test_weight_two_solver_agrees_with_weight_four(engine4):
    _, sol = engine4
    low = FrobeniusEngine(p=5, N=N, W=2, check_tables=False, check_limits=False).solve()
    assert digits(low.g["01"] - sol.g["01"]) >= N
    assert low.g_trace["01"] == sol.g_trace["01"]


def test_zeta_trace_reevaluates(engine4):
    engine, sol = engine4
    z = sol.zeta((3, 1))
    assert z.word == "0011" and z.weight == 4
    assert z.trace.is_homogeneous(4)
    back = Poly.from_json(z.trace.to_json())
    assert digits(engine.evaluate(back) - z.value) >= N - 4


def test_zeta_weight_too_large(engine4):
    _, sol = engine4
    with pytest.raises(WeightExceededError):
        sol.zeta((3, 2))


def test_limit_failure_is_reported():
    engine = FrobeniusEngine(p=5, N=N, W=2, j_max=3, check_tables=False, limit_tolerance=40)
    with pytest.raises(LimitNotDetectedError, match="limit not detected at precision 12"):
        engine.solve()


def test_invalid_prime():
    with pytest.raises(ValueError):
        FrobeniusEngine(p=4)
    with pytest.raises(ValueError):
        FrobeniusEngine(p=2)


def test_constant_table_sanity(engine4):
    engine, _ = engine4
    assert PadicTable.constant(engine.scale, 1)[17].equals(PadicNumber(5, 0, 1, 64))
