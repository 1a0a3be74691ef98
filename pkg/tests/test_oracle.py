from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_mzv.oracle import (EMPTY, Composition, brute_gamma, brute_gamma_exact, brute_sigma,
                              brute_sigma_exact, integrate_forms, ode_integrate_gfrak)
from padic_mzv.padic import PadicNumber, from_rational
from padic_mzv.tables import PadicTable, exact_scale
from padic_mzv.words import NCSeries


def enumerate_sigma(c: Composition, n: int, p: int) -> Fraction:
    """Sum over every increasing tuple, the literal definition."""
    total = Fraction(0)
    for idx in combinations(range(1, n), c.depth):
        if all((a - m) % p == 0 for a, m in zip(idx, c.m)):
            term = Fraction(1)
            for a, s in zip(idx, c.s):
                term /= Fraction(a) ** s
            total += term
    return total


def padic(q: Fraction, p: int, prec: int = 40) -> PadicNumber:
    return from_rational(q.numerator, q.denominator, p, prec) if q else PadicNumber.zero(p, prec)


compositions = st.integers(0, 3).flatmap(lambda d: st.tuples(
    st.lists(st.integers(1, 3), min_size=d, max_size=d),
    st.lists(st.integers(0, 2), min_size=d, max_size=d))).map(lambda sm: Composition(sm[0], sm[1]))


def test_empty_index_set_and_empty_composition():
    c = Composition((2, 1), (1, 0))
    assert brute_sigma_exact(c, 1, 3) == 0
    assert brute_sigma(c, 1, 3).is_zero
    assert brute_sigma_exact(EMPTY, 17, 3) == 1


def test_spec_points_p3():
    assert brute_sigma_exact(Composition((2, 1), (0, 0)), 9, 3) == Fraction(1, 54)
    assert enumerate_sigma(Composition((2, 1), (0, 0)), 9, 3) == Fraction(1, 54)
    assert brute_gamma_exact(Composition((2,), (1,)), 4, 3) == Fraction(1, 16)
    assert brute_gamma_exact(Composition((2,), (1,)), 5, 3) == 0
    assert brute_gamma_exact(Composition((1, 1), (1, 0)), 6, 3) == Fraction(1, 6) * (1 + Fraction(1, 4))
    assert brute_gamma(Composition((2,), (1,)), 4, 3).equals(from_rational(1, 16, 3, 12))


@settings(max_examples=60, deadline=None)
@given(compositions, st.integers(1, 25), st.sampled_from([3, 5]))
def test_streaming_matches_enumeration(c, n, p):
    c = Composition(c.s, tuple(m % p for m in c.m))
    exact = enumerate_sigma(c, n, p)
    assert brute_sigma_exact(c, n, p) == exact
    assert (brute_sigma(c, n, p, 12) - padic(exact, p, 60)).valuation >= 12


@settings(max_examples=60, deadline=None)
@given(compositions.filter(lambda c: c.depth > 0), st.integers(2, 40), st.sampled_from([3, 5]))
def test_sigma_recursion(c, n, p):
    c = Composition(c.s, tuple(m % p for m in c.m))
    step = brute_sigma_exact(c, n + 1, p) - brute_sigma_exact(c, n, p)
    assert step == brute_gamma_exact(c, n, p)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2), st.integers(0, 2), st.integers(2, 30))
def test_depth_one_quasi_shuffle(a, b, i, j, n):
    p = 3
    x, y = Composition((a,), (i,)), Composition((b,), (j,))
    lhs = brute_sigma_exact(x, n, p) * brute_sigma_exact(y, n, p)
    rhs = (brute_sigma_exact(Composition((a, b), (i, j)), n, p)
           + brute_sigma_exact(Composition((b, a), (j, i)), n, p))
    if i == j:
        rhs += brute_sigma_exact(Composition((a + b,), (i,)), n, p)
    assert lhs == rhs


# ----------------------------------------------------------------- z-series integration
@pytest.fixture(scope="module")
def scale3():
    return exact_scale(3, 81, 4, 12)


def test_omega0_divides_by_n(scale3):
    gam = PadicTable.from_function(scale3, lambda n: brute_gamma_exact(Composition((1,), (1,)), n, 3))
    out = integrate_forms(scale3, gam, None, None)
    assert out[4].equals(from_rational(1, 16, 3, 12))
    for n in range(1, 82):
        assert out[n].equals(padic(brute_gamma_exact(Composition((2,), (1,)), n, 3), 3), 12)


def test_omega1_on_zero_is_zero(scale3):
    out = integrate_forms(scale3, None, None, PadicTable.zeros(scale3))
    assert out.is_zero()


def test_omegap_spot_values(scale3):
    gam = PadicTable.from_function(scale3, lambda n: brute_gamma_exact(Composition((1,), (1,)), n, 3))
    out = integrate_forms(scale3, None, gam, None)
    for n in (4, 7, 13, 40):
        want = -3 * brute_gamma_exact(Composition((1, 1), (1, 1)), n, 3)
        assert out[n].equals(padic(want, 3), 12)


def zero_g(p: int, W: int) -> NCSeries:
    return NCSeries({"": 1, "0": 0, "1": 0}, W)


@pytest.mark.parametrize("p", [3, 5])
def test_depth_one_words(p):
    scale = exact_scale(p, p**3, 4, 12)
    tables = ode_integrate_gfrak(2, zero_g(p, 1), scale)
    assert tables["0"].is_zero()
    for n in range(1, p**3 + 1):
        want = Fraction(p, n) if n % p else Fraction(0)
        assert tables["1"][n].equals(padic(want, p), 12)
        assert tables["01"][n].equals(padic(want**2, p), 12)
    if p == 5:
        assert tables["01"][7].equals(from_rational(25, 49, 5, 12))


def test_e1e1_is_half_the_square(scale3):
    tables = ode_integrate_gfrak(2, zero_g(3, 1), scale3)
    one = [tables["1"][k] for k in range(28)]
    for n in range(1, 28):
        square = sum((one[k] * one[n - k] for k in range(1, n)), PadicNumber.zero(3, 30))
        assert tables["11"][n].equals(square / 2, 10)
