"""Numerical branches against independent special-function oracles.

[DERIVED] oracles: scipy.special.kv, mpmath.besselk, finite differences.
"""

import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import kv

from artifact.evaluator import (QuadratureSpec, eval_derivative,
                                eval_integral_sl2, eval_integral_sl3,
                                eval_series_sl2, macdonald_K,
                                whittaker_hat_sl2, whittaker_value)
from artifact.params import Weight
from artifact.whittaker import WhittakerSpec


def _spec2(la, mL, mR):
    return WhittakerSpec(2, Weight((la,)), (mL,), (mR,))


def test_macdonald_K_against_scipy():
    for nu in (-0.7, 0.0, 0.35, 1.2, 2.5):
        for z in (0.3, 1.0, 4.2):
            got = macdonald_K(nu, z).value
            ref = float(kv(nu, z))
            assert abs(got - ref) <= 1e-11 * abs(ref)


def test_macdonald_K_against_mpmath():
    got = macdonald_K(0.4, 2.2).value
    ref = float(mpmath.besselk(mpmath.mpf("0.4"), mpmath.mpf("2.2")))
    assert abs(got - ref) <= 1e-12 * abs(ref)


def test_integral_branch_matches_bessel_closed_form():
    for la in (-0.6, 0.3, 1.7):
        for mL, mR in ((1.0, 1.0), (0.7, 1.3)):
            for ph in (-0.5, 0.0, 0.8):
                got = eval_integral_sl2(_spec2(la, mL, mR), ph).value
                z = 2.0 * math.sqrt(mL * mR) * math.exp(-ph)
                ref = (2.0 * mR ** (la + 1)
                       * (mL * mR) ** (-(la + 1) / 2)
                       * math.exp((la + 1) * ph) * float(kv(la + 1, z)))
                assert abs(got - ref) <= 1e-10 * abs(ref)


def test_hat_branch_matches_bessel_closed_form():
    for la in (0.3, 1.45):
        for ph in (-0.4, 0.6):
            mL, mR = 0.7, 1.3
            got = whittaker_hat_sl2(_spec2(la, mL, mR), ph).value
            z = 2.0 * math.sqrt(mL * mR) * math.exp(-ph)
            ref = (2.0 * (mL * mR) ** ((la + 1) / 2)
                   / math.gamma(la + 1) * math.exp(-ph)
                   * float(kv(la + 1, z)))
            assert abs(got - ref) <= 1e-10 * abs(ref)


def test_series_trivial_mu_zero():
    assert abs(eval_series_sl2(0.3, 0.0, 1.0).value
               - math.exp(0.3)) < 1e-15


def test_series_against_mpmath_hyp0f1_like_sum():
    la, z, ph = 0.45, 0.91, 0.2
    with mpmath.workdps(40):
        acc = mpmath.mpf(0)
        zz = mpmath.mpf(str(z)) * mpmath.exp(-2 * mpmath.mpf(str(ph)))
        for i in range(80):
            den = mpmath.factorial(i) * mpmath.mpf(1)
            for k in range(i):
                den *= (mpmath.mpf(str(la)) - k)
            acc += zz ** i / den
        ref = float(acc * mpmath.exp(mpmath.mpf(str(la)) * mpmath.mpf(str(ph))))
    got = eval_series_sl2(la, z, ph).value
    assert abs(got - ref) <= 1e-13 * abs(ref)


def test_series_pole_raises():
    with pytest.raises(ZeroDivisionError):
        eval_series_sl2(2.0, 1.0, 0.0)


def test_derivative_matches_finite_difference():
    la, mL, mR, ph = 0.3, 0.7, 1.3, 0.25
    spec = _spec2(la, mL, mR)
    h = 1e-5
    for branch in ("series_sl2", "hat_sl2"):
        d1 = eval_derivative(branch, spec, (ph,), (1,)).value
        fd = (whittaker_value(branch, spec, (ph + h,)).value
              - whittaker_value(branch, spec, (ph - h,)).value) / (2 * h)
        assert abs(d1 - fd) <= 1e-8 * max(abs(d1), 1.0)


def test_sl3_derivative_matches_finite_difference():
    spec = WhittakerSpec(3, Weight((0.3, 0.45)), (0.7, 0.9), (1.3, 1.1))
    ph = (0.1, -0.2)
    h = 1e-5
    d1 = eval_derivative("hat_sl3", spec, ph, (1, 0)).value
    fd = (whittaker_value("hat_sl3", spec, (ph[0] + h, ph[1])).value
          - whittaker_value("hat_sl3", spec, (ph[0] - h, ph[1])).value) / (2 * h)
    assert abs(d1 - fd) <= 1e-6 * max(abs(d1), 1.0)


def test_sl3_toda_eigen_residual():
    """Quadratic Toda operator residual on the 3-body hat branch."""
    la1, la2 = 0.3, 0.45
    mL1, mL2, mR1, mR2 = 0.7, 0.9, 1.3, 1.1
    spec = WhittakerSpec(3, Weight((la1, la2)), (mL1, mL2), (mR1, mR2))
    scal = 2 * la1 + 2 * la2 + (2.0 / 3) * (la1 ** 2 + la2 ** 2 + la1 * la2)
    p1, p2 = 0.2, -0.1

    def dv(k1, k2):
        return eval_derivative("hat_sl3", spec, (p1, p2), (k1, k2)).value

    w = dv(0, 0)
    h = ((2 / 3) * (dv(2, 0) + dv(0, 2) + dv(1, 1))
         + 2 * (dv(1, 0) + dv(0, 1))
         - 2 * mL1 * mR1 * math.exp(-2 * p1 + p2) * w
         - 2 * mL2 * mR2 * math.exp(p1 - 2 * p2) * w)
    assert abs(h - scal * w) <= 1e-4 * abs(scal * w)


def test_eval_result_converged_flag_and_determinism():
    spec = _spec2(0.3, 0.7, 1.3)
    a = eval_integral_sl2(spec, 0.4)
    b = eval_integral_sl2(spec, 0.4)
    assert a.converged and a.value == b.value and a.est_error == b.est_error


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(method="monte-carlo")


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.8, 0.8), st.floats(0.2, 2.0))
def test_integral_positive_and_smooth(ph, m):
    """The wave function is positive for positive couplings."""
    v = eval_integral_sl2(_spec2(0.3, m, 1.1), ph).value
    assert v > 0
