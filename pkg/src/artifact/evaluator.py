"""Numerical evaluation of Whittaker wave functions.

Branches implemented:

* sl(2) series branch (entire solution, all-positive terms),
* sl(2) integral branch (Macdonald-K type), printed prefactor convention,
* sl(2) pairing-normalized ("hat") branch  e^{lam phi} I(phi) / I(0-potential),
* Macdonald function K_nu(z) from its own integral representation,
* sl(3) pairing-normalized 3-D integral branch.

All integrals are evaluated after the substitution x = e^t (and a logistic
substitution for the bounded variable), which renders every integrand
double-exponentially decaying on the line; the trapezoid rule on the
transformed line is then spectrally accurate (this is the double-exponential
/ tanh-sinh scheme for this integrand class).  Node accumulation uses
numpy's pairwise summation in a fixed order, so results are bit-reproducible
and independent of thread counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .whittaker import WhittakerSpec

__all__ = [
    "QuadratureSpec",
    "EvalResult",
    "eval_series_sl2",
    "eval_integral_sl2",
    "macdonald_K",
    "eval_integral_sl3",
    "eval_derivative",
    "whittaker_value",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Deterministic quadrature controls."""

    method: str = "tanh-sinh"
    rel_tol: float = 1e-12
    max_level: int = 13
    transform: str = "exp"
    # 3-D controls
    rel_tol_3d: float = 1e-7
    max_nodes_per_axis: int = 129

    def __post_init__(self):
        if self.method not in ("tanh-sinh", "adaptive-subdivision"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class EvalResult:
    value: float
    est_error: float
    method: str
    phi: tuple
    converged: bool = True

    def __post_init__(self):
        if math.isnan(self.value):
            raise ArithmeticError("NaN produced by evaluator")


DEFAULT_Q = QuadratureSpec()
_TINY = 1e-300


# ---------------------------------------------------------------------------
# series branch
# ---------------------------------------------------------------------------


def eval_series_sl2(lam: float, mu_prod: float, phi: float,
                    dorder: int = 0) -> EvalResult:
    """Entire-series branch: sum_i (mu_prod e^{-2 phi})^i / (i! (lam, i)),
    times e^{lam phi}; dorder-th phi-derivative computed termwise.

    (lam, i) = lam (lam-1) ... (lam-i+1); integer lam >= 1 is a pole.
    """
    if lam == int(lam) and lam >= 1:
        raise ZeroDivisionError(f"series pole at integer lam = {lam}")
    z = mu_prod * math.exp(-2.0 * phi)
    base = math.exp(lam * phi)  # z^i e^{lam phi} / (i! (lam, i))
    total = 0.0
    i = 0
    while True:
        term = base * (lam - 2 * i) ** dorder
        total += term
        if (i > 0 and abs(term) < 1e-16 * max(abs(total), _TINY)) or z == 0:
            break
        base *= z / ((i + 1) * (lam - i))
        i += 1
        if i > 10_000:
            raise ArithmeticError("series did not converge in 10000 terms")
    return EvalResult(total, abs(total) * 1e-15 + 1e-300, "series", (phi,))


# ---------------------------------------------------------------------------
# 1-D quadrature core
# ---------------------------------------------------------------------------


def _support_window_1d(exponent, lo=-60.0, hi=60.0, drop=55.0, pad=2.0):
    """Deterministic window where exp(exponent(t)) is non-negligible."""
    t = np.linspace(lo, hi, 241)
    vals = exponent(t)
    m = np.max(vals)
    mask = vals >= m - drop
    idx = np.where(mask)[0]
    return float(t[idx[0]]) - pad, float(t[idx[-1]]) + pad


def _trapezoid_refine(fvec, a: float, b: float, q: QuadratureSpec):
    """Trapezoid rule with interval doubling; deterministic pairwise sums."""
    n = 16
    ts = np.linspace(a, b, n + 1)
    h = (b - a) / n
    vals = fvec(ts)
    total = float(np.add.reduce(vals) - 0.5 * (vals[0] + vals[-1])) * h
    prev = total
    err = abs(total)
    converged = False
    for _ in range(q.max_level):
        mids = (ts[:-1] + ts[1:]) / 2.0
        h /= 2.0
        total = prev / 2.0 + h * float(np.add.reduce(fvec(mids)))
        ts = np.linspace(a, b, 2 * n + 1)
        n *= 2
        err = abs(total - prev)
        prev = total
        if err <= q.rel_tol * max(abs(total), _TINY):
            converged = True
            break
    return total, err, converged


# ---------------------------------------------------------------------------
# integrand families (sympy-built, lambdified, cached per derivative order)
# ---------------------------------------------------------------------------

_t, _t1, _t2, _s = sp.symbols("qt qt1 qt2 qs")
_ph, _ph1, _ph2 = sp.symbols("qphi qphi1 qphi2")
_la, _la1, _la2 = sp.symbols("qlam qlam1 qlam2")
_mL, _mR = sp.symbols("qmuL qmuR")
_mL1, _mL2, _mR1, _mR2 = sp.symbols("qmuL1 qmuL2 qmuR1 qmuR2")
_z, _nu = sp.symbols("qz qnu")

_FAMILY_EXPONENTS = {
    # printed sl(2) integral: mu_R^{lam+1} int x^{-lam-2} e^{-a/x - x} dx
    "integral_sl2": (
        -_mL * _mR * sp.exp(-2 * _ph) * sp.exp(-_t) - sp.exp(_t)
        - (_la + 1) * _t,
        (_t,), (_ph,), (_la, _mL, _mR),
    ),
    # pairing-normalized sl(2): e^{lam phi} int x^{-lam-2}
    #   e^{-muL/x - muR e^{-2 phi} x} dx / (muL^{-(lam+1)} Gamma(lam+1))
    "hat_sl2": (
        _la * _ph - _mL * sp.exp(-_t) - _mR * sp.exp(-2 * _ph) * sp.exp(_t)
        - (_la + 1) * _t,
        (_t,), (_ph,), (_la, _mL, _mR),
    ),
    # K_nu(z) = (1/2)(z/2)^nu int x^{-nu-1} e^{-x - z^2/(4x)} dx
    "macdonald": (
        -sp.exp(_t) - _z**2 * sp.exp(-_t) / 4 - _nu * _t,
        (_t,), (), (_nu, _z),
    ),
}

_NU3 = _la1 + _la2 + 2
_U = 1 / (1 + sp.exp(-_s))
_FAMILY_EXPONENTS["hat_sl3"] = (
    _la1 * _ph1 + _la2 * _ph2 - _NU3 * (_t1 + _t2)
    + (_la1 + 1) * sp.log(1 + sp.exp(-_s))
    + (_la2 + 1) * sp.log(1 + sp.exp(_s))
    - _mL2 * sp.exp(-_t2) / _U - _mL1 * sp.exp(-_t1) / (1 - _U)
    - _mR1 * sp.exp(-2 * _ph1 + _ph2) * sp.exp(_t1)
    - _mR2 * sp.exp(_ph1 - 2 * _ph2) * sp.exp(_t2),
    (_t1, _t2, _s), (_ph1, _ph2), (_la1, _la2, _mL1, _mL2, _mR1, _mR2),
)


@lru_cache(maxsize=None)
def _lambdified_integrand(family: str, dorder: tuple):
    exponent, tvars, phivars, pars = _FAMILY_EXPONENTS[family]
    expr = sp.exp(exponent)
    for ph, k in zip(phivars, dorder):
        expr = sp.diff(expr, ph, k)
    return sp.lambdify(tvars + phivars + pars, expr, modules="numpy")


@lru_cache(maxsize=None)
def _lambdified_exponent(family: str):
    exponent, tvars, phivars, pars = _FAMILY_EXPONENTS[family]
    return sp.lambdify(tvars + phivars + pars, exponent, modules="numpy")


def _eval_family_1d(family: str, phi_vals: tuple, par_vals: tuple,
                    dorder: tuple, q: QuadratureSpec):
    expf = _lambdified_exponent(family)
    a, b = _support_window_1d(lambda t: expf(t, *phi_vals, *par_vals))
    f = _lambdified_integrand(family, dorder)
    val, err, ok = _trapezoid_refine(
        lambda t: f(t, *phi_vals, *par_vals), a, b, q)
    return val, err, ok


# ---------------------------------------------------------------------------
# public integral evaluators
# ---------------------------------------------------------------------------


def _spec_floats_sl2(spec: WhittakerSpec):
    lam = float(spec.weight[0])
    mL = float(spec.mu_left[0])
    mR = float(spec.mu_right[0])
    return lam, mL, mR


def eval_integral_sl2(spec: WhittakerSpec, phi: float,
                      q: QuadratureSpec = DEFAULT_Q,
                      dorder: int = 0) -> EvalResult:
    """Macdonald-type branch, printed prefactor (1/mu_R)^{-(lam+1)}."""
    lam, mL, mR = _spec_floats_sl2(spec)
    if mL * mR <= 0:
        raise ValueError("require mu_L mu_R > 0")
    val, err, ok = _eval_family_1d(
        "integral_sl2", (phi,), (lam, mL, mR), (dorder,), q)
    c = mR ** (lam + 1)
    return EvalResult(c * val, abs(c) * err, q.method, (phi,), ok)


def whittaker_hat_sl2(spec: WhittakerSpec, phi: float,
                      q: QuadratureSpec = DEFAULT_Q,
                      dorder: int = 0) -> EvalResult:
    """Pairing-normalized branch: e^{lam phi} <w_L| e^{phi h} |w_R> with
    <w|vac> = 1 normalization; equals integral branch up to
    mu_L^{lam+1} / Gamma(lam+1) and the reflection of the exponential factor.
    """
    lam, mL, mR = _spec_floats_sl2(spec)
    if mL <= 0 or mR <= 0:
        raise ValueError("require mu_L, mu_R > 0")
    val, err, ok = _eval_family_1d(
        "hat_sl2", (phi,), (lam, mL, mR), (dorder,), q)
    c = mL ** (lam + 1) / math.gamma(lam + 1)
    return EvalResult(c * val, abs(c) * err, q.method, (phi,), ok)


def macdonald_K(nu: float, z: float, q: QuadratureSpec = DEFAULT_Q) -> EvalResult:
    if z <= 0:
        raise ValueError("require z > 0")
    val, err, ok = _eval_family_1d("macdonald", (), (nu, z), (), q)
    c = 0.5 * (z / 2.0) ** nu
    return EvalResult(c * val, abs(c) * err, q.method, (), ok)


# ---------------------------------------------------------------------------
# sl(3): tensorized 3-D rule
# ---------------------------------------------------------------------------


def _support_window_3d(expf, phi_vals, par_vals):
    g = np.linspace(-30.0, 30.0, 25)
    T1, T2, S = np.meshgrid(g, g, g, indexing="ij")
    vals = expf(T1, T2, S, *phi_vals, *par_vals)
    m = np.max(vals)
    mask = vals >= m - 60.0
    wins = []
    for axis, arr in enumerate((T1, T2, S)):
        sel = arr[mask]
        wins.append((float(np.min(sel)) - 3.0, float(np.max(sel)) + 3.0))
    return wins


def _trapezoid_3d(f, wins, q: QuadratureSpec):
    prev = None
    err = math.inf
    converged = False
    n = 16
    while True:
        axes = [np.linspace(a, b, n + 1) for a, b in wins]
        hs = [(b - a) / n for a, b in wins]
        T1, T2, S = np.meshgrid(*axes, indexing="ij")
        vals = f(T1, T2, S)
        for axis in range(3):
            w = np.ones(vals.shape[axis])
            w[0] = w[-1] = 0.5
            shape = [1, 1, 1]
            shape[axis] = -1
            vals = vals * w.reshape(shape)
            vals = np.add.reduce(vals, axis=axis, keepdims=True) * hs[axis]
        total = float(vals.reshape(()))
        if prev is not None:
            err = abs(total - prev)
            if err <= q.rel_tol_3d * max(abs(total), _TINY):
                converged = True
                break
        prev = total
        if 2 * n + 1 > q.max_nodes_per_axis:
            break
        n *= 2
    return total, err, converged


def _spec_floats_sl3(spec: WhittakerSpec):
    return (float(spec.weight[0]), float(spec.weight[1]),
            float(spec.mu_left[0]), float(spec.mu_left[1]),
            float(spec.mu_right[0]), float(spec.mu_right[1]))


def _hat_norm_sl3(la1, la2, mL1, mL2):
    """Zero-potential pairing value: Gamma(nu)^2 (mL1 mL2)^{-nu} B(la2+1, la1+1)."""
    nu = la1 + la2 + 2
    beta = (math.gamma(la2 + 1) * math.gamma(la1 + 1)
            / math.gamma(la1 + la2 + 2))
    return math.gamma(nu) ** 2 * (mL1 * mL2) ** (-nu) * beta


def eval_integral_sl3(spec: WhittakerSpec, phi1: float, phi2: float,
                      q: QuadratureSpec = DEFAULT_Q,
                      dorder: tuple = (0, 0)) -> EvalResult:
    """Pairing-normalized sl(3) branch over {x1>0, x2>0, 0 < x12 < x1 x2}
    (x12 = x1 x2 u, x_i = e^{t_i}, u logistic in s; bases positive, so the
    absolute-value convention for fractional powers is automatic).
    """
    pars = _spec_floats_sl3(spec)
    if any(p <= 0 for p in pars[2:]):
        raise ValueError("require all mu^L_i, mu^R_i > 0")
    expf = _lambdified_exponent("hat_sl3")
    wins = _support_window_3d(expf, (phi1, phi2), pars)
    f = _lambdified_integrand("hat_sl3", tuple(dorder))
    val, err, ok = _trapezoid_3d(
        lambda T1, T2, S: f(T1, T2, S, phi1, phi2, *pars), wins, q)
    c = 1.0 / _hat_norm_sl3(*pars[:4])
    return EvalResult(c * val, abs(c) * err,
                      q.method + "-3d[0<x12<x1*x2]", (phi1, phi2), ok)


# ---------------------------------------------------------------------------
# uniform entry points
# ---------------------------------------------------------------------------

_TARGETS_1D = {"series_sl2", "integral_sl2", "hat_sl2"}


def whittaker_value(branch: str, spec: WhittakerSpec, phis: tuple,
                    dorder: tuple = None,
                    q: QuadratureSpec = DEFAULT_Q) -> EvalResult:
    """Evaluate one Whittaker branch with optional phi-derivatives.

    branch: 'series_sl2' | 'integral_sl2' | 'hat_sl2' (n=2, phis=(phi,))
            or 'hat_sl3' (n=3, phis=(phi1, phi2)).
    """
    if branch in _TARGETS_1D:
        (phi,) = phis
        k = 0 if dorder is None else dorder[0]
        if branch == "series_sl2":
            lam, mL, mR = _spec_floats_sl2(spec)
            return eval_series_sl2(lam, mL * mR, phi, dorder=k)
        if branch == "integral_sl2":
            return eval_integral_sl2(spec, phi, q, dorder=k)
        return whittaker_hat_sl2(spec, phi, q, dorder=k)
    if branch == "hat_sl3":
        d = (0, 0) if dorder is None else tuple(dorder)
        return eval_integral_sl3(spec, phis[0], phis[1], q, dorder=d)
    raise ValueError(f"unknown branch {branch!r}")


def eval_derivative(target: str, spec: WhittakerSpec, phis: tuple,
                    multi_index: tuple,
                    q: QuadratureSpec = DEFAULT_Q) -> EvalResult:
    """phi-derivative of a named evaluator target; order <= 4 per variable."""
    if any(k < 0 or k > 4 for k in multi_index):
        raise ValueError("derivative orders must be in 0..4")
    return whittaker_value(target, spec, phis, tuple(multi_index), q)
