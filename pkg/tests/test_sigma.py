import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_mzv.oracle import Composition, brute_sigma_exact
from padic_mzv.padic import PadicNumber, from_rational
from padic_mzv.psf import fit_table, psf_taylor
from padic_mzv.sigma import (Coefficient, SigmaExpr, dominated, dominated_bases, sigma_mul, stuffle,
                             stuffle_compositions)
from padic_mzv.tables import PadicTable

N = 12


def q(x, p: int, prec: int = 60) -> PadicNumber:
    x = Fraction(x)
    return from_rational(x.numerator, x.denominator, p, prec) if x else PadicNumber.zero(p, prec)


def close(a: PadicNumber, b: PadicNumber, digits: int = N) -> bool:
    return (a - b).valuation >= digits


# ---------------------------------------------------------------- expansion
@pytest.mark.parametrize("s,i", [(1, 1), (2, 3), (3, 4)])
def test_nonzero_residue_depth_one_is_its_own_coefficient(alg5, s, i):
    c = Composition((s,), (i,))
    expr = alg5.expand_sigma(c)
    assert list(expr.terms) == [()]
    assert expr.terms[()].values().equals(alg5.sums.sigma(c))


def test_zero_residue_depth_one_is_a_basis_element(alg5):
    expr = alg5.expand_sigma(Composition((2,), (0,)))
    assert list(expr.terms) == [(2,)]
    assert expr.terms[(2,)].values().equals(PadicTable.constant(alg5.scale, 1))


def test_expansion_matches_enumeration_p3(alg3):
    c = Composition((1, 1), (1, 0))
    tab = alg3.expand_sigma(c).table()
    for n in range(4, 31):
        assert close(tab[n], q(brute_sigma_exact(c, n, 3), 3))


comps5 = st.integers(1, 3).flatmap(lambda d: st.tuples(
    st.lists(st.integers(1, 2), min_size=d, max_size=d),
    st.lists(st.integers(0, 4), min_size=d, max_size=d))).map(lambda sm: Composition(sm[0], sm[1]))


@settings(max_examples=15, deadline=None)
@given(comps5)
def test_expansion_bases_are_dominated_and_exact(alg5, c):
    expr = alg5.expand_sigma(c)
    assert all(dominated(t, c.s) for t in expr.terms)
    assert expr.table().equals(alg5.sums.sigma(c))
    for n in (7, 50, 126):
        assert close(expr(n), q(brute_sigma_exact(c, n, 5), 5))


def test_dominance_order():
    assert dominated((), (3,))
    assert dominated((1,), (2, 1))
    assert dominated((2, 1), (2, 1))
    assert not dominated((3,), (2, 1))
    assert not dominated((1, 1), (2,))
    assert sorted(dominated_bases((2,))) == [(), (1,), (2,)]


# ---------------------------------------------------------------- delta
def test_delta_spec_point(alg3):
    expr = alg3.delta(alg3.expand_sigma(Composition.basis((2, 1))))
    assert close(expr(6), q(Fraction(1, 54), 3))
    assert close(expr(6), q(Fraction(1, 6) * brute_sigma_exact(Composition.basis((2,)), 6, 3), 3))


def test_delta_of_constant_vanishes(alg5):
    const = SigmaExpr(alg5.sums, {(): Coefficient(PadicTable.constant(alg5.scale, 7))})
    tab = alg5.delta(const).table()
    assert all(tab[n].is_zero for n in alg5.delta_grid())


def test_delta_of_harmonic_basis(alg5):
    tab = alg5.delta(alg5.expand_sigma(Composition.basis((1,)))).table()
    for n in alg5.delta_grid()[:60]:
        assert close(tab[n], q(Fraction(1, n), 5))


# ---------------------------------------------------------------- regularization
def test_projection_of_pure_psf_is_its_fit(alg5):
    c = Composition((1,), (2,))
    f = alg5.regularize_r(alg5.expand_sigma(c)).psf
    direct = fit_table(alg5.sums.sigma(c), alg5.work_degree, alg5.threshold)
    for n in (3, 77, 1000):
        assert close(f(n), direct(n), f.tail_valuation_bound)


@pytest.mark.parametrize("s", [(1,), (2,), (1, 1), (2, 1)])
def test_projection_of_basis_elements_is_zero(alg5, s):
    f = alg5.sigma_tilde(Composition.basis(s))
    assert all(c.is_zero for b in f.branches for c in b)
    assert alg5.sigma_bar(Composition.basis(s)).value.is_zero


@pytest.mark.parametrize("s,i", [(1, 1), (2, 2), (3, 4), (4, 3)])
def test_depth_one_regularized_value_vanishes(alg5, s, i):
    val = alg5.sigma_bar(Composition((s,), (i,))).value
    assert val.valuation >= alg5.threshold


@pytest.mark.parametrize("c", [Composition((2, 1), (1, 0)), Composition((1, 2), (3, 0)),
                               Composition((1, 1, 1), (1, 2, 0))])
def test_two_regularization_paths_agree(alg5, c):
    a = alg5.sigma_bar(c).value
    b = alg5.regularize_by_collocation(c)
    assert close(a, b, min(N, b.precision))


@pytest.mark.parametrize("c", [Composition((1,), (1,)), Composition((2,), (3,)), Composition((1, 2), (1, 4))])
def test_derivative_matches_appended_limit(alg5, c):
    t1 = psf_taylor(alg5.sigma_tilde(c), 1)
    assert close(t1, -alg5.sigma_bar(c.append(1, 0)).value)
    assert close(t1, alg5.gamma_bar(c.append(1, 0)).value)


def test_derivative_identity_fails_with_zero_residue_inside(alg5):
    # a zero residue makes a non-empty coefficient nonconstant, and the shortcut breaks;
    # both regularization routes still agree on each side separately
    c = Composition((1, 1), (0, 1))
    t1 = psf_taylor(alg5.sigma_tilde(c), 1)
    appended = c.append(1, 0)
    bar = alg5.sigma_bar(appended).value
    assert not close(t1, -bar)
    assert close(bar, alg5.regularize_by_collocation(appended), 6)


def test_gamma_bar_with_nonzero_last_residue_is_zero(alg5):
    assert alg5.gamma_bar(Composition((2, 1), (0, 3))).value.is_zero


# ---------------------------------------------------------------- products
def test_harmonic_square():
    assert stuffle((1,), (1,)) == Counter({(1, 1): 2, (2,): 1})


def test_harmonic_square_on_grid(alg5):
    e1 = alg5.expand_sigma(Composition.basis((1,)))
    prod = sigma_mul(e1, e1)
    assert set(prod.terms) == {(1, 1), (2,)}
    sq = alg5.sums.sigma_p((1,)) * alg5.sums.sigma_p((1,))
    rhs = alg5.sums.sigma_p((1, 1)).scale_by(2) + alg5.sums.sigma_p((2,))
    assert prod.table().equals(sq)
    assert sq.equals(rhs)


def test_multiplying_by_one(alg5):
    a = alg5.expand_sigma(Composition((2, 1), (1, 0)))
    one = alg5.expand_sigma(Composition((), ()))
    assert sigma_mul(a, one).table().equals(a.table())


def test_products_are_pointwise(alg5):
    rng = random.Random(3)
    a = alg5.expand_sigma(Composition((1, 1), (2, 0)))
    b = alg5.expand_sigma(Composition((2,), (0,)))
    ab = sigma_mul(a, b).table()
    ta, tb = a.table(), b.table()
    for n in rng.sample(range(1, 5**5 + 1), 50):
        assert close(ab[n], ta[n] * tb[n], ab.prec)


@settings(max_examples=30, deadline=None)
@given(comps5, comps5, st.integers(2, 60))
def test_stuffle_with_residues_on_brute_values(a, b, n):
    p = 5
    lhs = brute_sigma_exact(a, n, p) * brute_sigma_exact(b, n, p)
    rhs = sum((k * brute_sigma_exact(c, n, p) for c, k in stuffle_compositions(a, b).items()), Fraction(0))
    assert lhs == rhs
