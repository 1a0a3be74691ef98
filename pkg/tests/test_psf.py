from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_mzv.oracle import Composition, brute_sigma, brute_sigma_exact
from padic_mzv.padic import PadicNumber, from_rational, valuation
from padic_mzv.psf import (PSF, DegreeExceededError, FitRejectedError, LaurentPSF, fit_table,
                           holdout_nodes, project_s, psf_add, psf_constant, psf_fit, psf_identity,
                           psf_indicator, psf_mul, psf_power_mask, psf_prefix_sum, psf_round1,
                           psf_sharp1, psf_taylor, psf_value_at_zero)

N, D = 12, 8
THRESHOLD = N - (valuation(40320, 5) + D + 2)


def q(x, p: int, prec: int = 40) -> PadicNumber:
    x = Fraction(x)
    return from_rational(x.numerator, x.denominator, p, prec) if x else PadicNumber.zero(p, prec)


def agree(a: PadicNumber, b: PadicNumber, digits: int) -> bool:
    return (a - b).valuation >= digits


# ---------------------------------------------------------------- masks and divisions
def test_power_mask_examples():
    zero_mask = psf_power_mask(5, 0)
    for n in range(1, 30):
        assert zero_mask(n).equals(q(1 if n % 5 else 0, 5))
    lin = psf_power_mask(5, 1)
    assert [c.to_fraction() for c in lin.branches[2]] == [2, 1]
    inv = psf_power_mask(3, -1, D=20)
    assert agree(inv(4), q(Fraction(1, 4), 3), 18)


def test_round1_of_constant():
    c = Fraction(7, 2)
    f = psf_round1(psf_constant(5, c), D=12)
    assert psf_value_at_zero(f).is_zero
    for n in (1, 2, 6, 13):
        assert agree(f(n), q(c / n, 5), 10)


def test_sharp1_of_identity_is_multiple_indicator():
    f = psf_sharp1(psf_identity(5))
    for n in range(1, 40):
        assert f(n).equals(q(0 if n % 5 else 1, 5))


def test_prefix_sums():
    ones = psf_prefix_sum(psf_constant(5, 1))
    tri = psf_prefix_sum(psf_identity(5))
    count = psf_prefix_sum(psf_indicator(3, 0))
    for n in range(1, 40):
        assert ones(n).equals(q(n, 5))
        assert tri(n).equals(q(n * (n + 1) // 2, 5))
    assert count(10).equals(q(3, 3))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.integers(-20, 20), min_size=1, max_size=4), min_size=3, max_size=3),
       st.integers(1, 200))
def test_prefix_sum_matches_running_total(polys, n):
    p = 3
    f = PSF(p, tuple(tuple(q(c, p) for c in b) for b in polys))
    want = sum(f(k).to_fraction() for k in range(1, n + 1))
    assert psf_prefix_sum(f)(n).equals(q(want, p, 40), 30)


# ---------------------------------------------------------------- fitting
def test_fit_square_is_exact():
    p = 5
    samples = {n: q(n * n, p) for n in range(1, 200)}
    held = [n for n in range(1, 200) if n % p == 2][D + 1:]
    coeffs, bound = psf_fit(samples, 2, D, p, held)
    assert [c.to_fraction() for c in coeffs[:3]] == [4, 4, 1]
    assert all(c.is_zero for c in coeffs[3:])
    # the residual is zero at whatever precision survived the divided differences
    assert bound >= 40 - (valuation(40320, p) + D)


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_fit_predicts_held_out_brute_values(alg5, i):
    c = Composition((1,), (i,))
    f = fit_table(alg5.sums.sigma(c), D, THRESHOLD)
    held = holdout_nodes(5, 3, D, 5**5, extra=12)
    assert len(held) >= 10
    for n in held:
        assert agree(f(n), brute_sigma(c, n, 5, N), THRESHOLD)


def test_divergent_basis_element_rejected(alg5):
    with pytest.raises(FitRejectedError, match="fit rejected: function not PSF-like at degree 8"):
        fit_table(alg5.sums.sigma_p((1,)), D, THRESHOLD)


def test_value_at_zero_and_derivative_of_depth_one(alg5):
    f = fit_table(alg5.sums.sigma(Composition((1,), (1,))), D, THRESHOLD)
    assert psf_value_at_zero(f).valuation >= THRESHOLD
    # the slope at 0 is the limit of f(p^j)/p^j along brute data
    slope = psf_taylor(psf_round1(f), 0)
    for j in (3, 4):
        n = 5**j
        est = q(brute_sigma_exact(Composition((1,), (1,)), n, 5), 5) / n
        assert agree(slope, est, THRESHOLD - 1)


def test_taylor_of_constant_and_degree_cap():
    f = psf_constant(5, 3)
    assert psf_taylor(f, 0).equals(q(3, 5))
    assert all(psf_taylor(f, j).is_zero for j in range(1, D + 1))
    with pytest.raises(DegreeExceededError, match="degree exceeded"):
        psf_taylor(f, D + 1)


def test_product_of_fits_predicts_brute_product(alg5):
    a, b = Composition((1,), (1,)), Composition((1,), (2,))
    f = fit_table(alg5.sums.sigma(a), D, THRESHOLD)
    g = fit_table(alg5.sums.sigma(b), D, THRESHOLD)
    fg = psf_mul(f, g)
    tol = fg.tail_valuation_bound
    assert tol >= THRESHOLD
    fresh = [n for n in range(500, 3000, 127)][:20]
    assert len(fresh) == 20
    for n in fresh:
        assert agree(fg(n), brute_sigma(a, n, 5, N) * brute_sigma(b, n, 5, N), tol)


# ---------------------------------------------------------------- algebra
poly_psf = st.lists(st.lists(st.integers(-9, 9), min_size=1, max_size=4), min_size=3, max_size=3)


@settings(max_examples=40, deadline=None)
@given(poly_psf, poly_psf, st.integers(1, 300))
def test_add_and_mul_are_pointwise(a, b, n):
    p = 3
    f = PSF(p, tuple(tuple(q(c, p) for c in br) for br in a))
    g = PSF(p, tuple(tuple(q(c, p) for c in br) for br in b))
    assert psf_add(f, g)(n).equals(f(n) + g(n), 30)
    assert psf_mul(f, g)(n).equals(f(n) * g(n), 30)


def test_add_zero_and_identity_square():
    f = psf_identity(5)
    assert all((f + psf_constant(5, 0))(n).equals(f(n)) for n in range(1, 20))
    sq = psf_mul(f, f)
    for i in range(5):
        assert [c.to_fraction() for c in sq.branches[i]][:3] == [i * i, 2 * i, 1]


def test_json_round_trip():
    f = psf_power_mask(5, -2, 6, 20)
    assert PSF.from_json(f.to_json()) == f


def test_laurent_projection():
    f = psf_identity(5)
    assert project_s(LaurentPSF(f)) == f
    zero = psf_constant(5, 0)
    g = LaurentPSF(zero, (q(1, 5),))
    assert g(10).equals(q(Fraction(1, 10), 5))
    assert all(project_s(g)(n).is_zero for n in range(1, 20))
