"""Whittaker vectors, dual Whittaker kernels, and their eigen-properties."""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from .algebra import UEAElement, gen, generator_list, positive_roots
from .borel_weil import (
    TruncatedVector,
    apply_uea,
    cell_coords,
    cell_matrix,
    cell_pairs,
    derive_generator_fields,
    truncate_poly,
    vacuum,
)
from .params import Weight, lam, muL_vector, muR_vector


@dataclass(frozen=True)
class WhittakerSpec:
    """Identifies one Whittaker function: rank data and eigenvalues.

    mu_left / mu_right entries may be exact rationals, floats, or symbols.
    """

    n: int
    weight: Weight
    mu_left: tuple
    mu_right: tuple

    def __post_init__(self):
        object.__setattr__(self, "mu_left", tuple(sp.sympify(m) for m in self.mu_left))
        object.__setattr__(self, "mu_right", tuple(sp.sympify(m) for m in self.mu_right))
        if len(self.mu_left) != self.n - 1 or len(self.mu_right) != self.n - 1:
            raise ValueError("mu vectors must have length n-1")
        if self.weight.rank != self.n - 1:
            raise ValueError("weight rank mismatch")

    @staticmethod
    def generic(n: int) -> "WhittakerSpec":
        return WhittakerSpec(
            n,
            Weight(tuple(lam(i) for i in range(1, n))),
            muL_vector(n - 1),
            muR_vector(n - 1),
        )


def whittaker_vector(spec: WhittakerSpec, D: int) -> TruncatedVector:
    """Degree-<=D truncation of exp(sum_i mu^R_i x_{i,i+1}), vacuum coeff 1."""
    n = spec.n
    xs = dict(zip(cell_pairs(n), cell_coords(n)))
    arg = sum(
        spec.mu_right[i - 1] * xs[(i, i + 1)] for i in range(1, n)
    )
    poly = sum(arg**k / sp.factorial(k) for k in range(D + 1))
    kept, _ = truncate_poly(n, sp.expand(poly), D)
    return TruncatedVector(n, kept, spec.weight, D)


def whittaker_vector_pbw_sl2(spec: WhittakerSpec, D: int) -> TruncatedVector:
    """sl(2) series form sum_k mu^k f^k |vac> / (k! (lam,k)), realized.

    (lam, k) := lam (lam - 1) ... (lam - k + 1); requires lam not in 1..D.
    """
    if spec.n != 2:
        raise ValueError("PBW series form implemented for n = 2")
    lam0 = spec.weight[0]
    mu = spec.mu_right[0]
    acc = vacuum(2, spec.weight, D)
    f = gen(1, "f", 1)
    fk = UEAElement.one(1)
    for k in range(1, D + 1):
        fk = fk * f
        denom = sp.factorial(k) * sp.prod([lam0 - i for i in range(k)])
        if denom == 0:
            raise ZeroDivisionError(f"degenerate (lam,{k}) factor for lam={lam0}")
        acc = acc + apply_uea(fk, vacuum(2, spec.weight, D)).scale(mu**k / denom)
    return acc


def check_eigenproperty(v: TruncatedVector, spec: WhittakerSpec, D: int) -> dict:
    """Verify e_i v = mu^R_i v and (non-simple root) e v = 0 below the tail."""
    n = spec.n
    rank = n - 1
    report = {"ok": True, "failures": []}
    for root in positive_roots(rank):
        op = UEAElement.generator(rank, ("e",) + root)
        target = spec.mu_right[root[0] - 1] if root[0] == root[1] else sp.Integer(0)
        got = apply_uea(op, v)
        diff = sp.expand(got.poly - target * v.poly)
        kept, _ = truncate_poly(n, diff, D - 1)
        if sp.simplify(kept) != 0:
            report["ok"] = False
            report["failures"].append((root, sp.simplify(kept)))
    return report


# ---------------------------------------------------------------------------
# dual kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualKernel:
    """Closed-form dual Whittaker integrand factor in the cell coordinates."""

    n: int
    expr: sp.Expr  # in cell_coords(n), mu_left symbols substituted


def _reversal_minors(n: int):
    """Principal minors D_i and shifted minors D_{i,i+1} of X S^{-1}."""
    x = cell_matrix(n)
    s = sp.zeros(n, n)
    for i in range(n):
        s[i, n - 1 - i] = 1
    m = x * s  # S^{-1} = S
    principal, shifted = [], []
    for i in range(1, n):
        principal.append(m[:i, :i].det())
        cols = list(range(i - 1)) + [i]
        shifted.append(m[:i, cols].det())
    return principal, shifted


def dual_whittaker_kernel(spec: WhittakerSpec) -> DualKernel:
    """Minor-based dual kernel; reproduces the printed n=2 and n=3 forms.

    kernel = prod_i D_i^{-(lam_i + 2)} * exp(- sum_i mu^L_{n-i} D_{i,i+1} / D_i)
    """
    n = spec.n
    if n not in (2, 3, 4):
        raise ValueError("dual kernel supported for n in {2, 3, 4}")
    principal, shifted = _reversal_minors(n)
    expr = sp.Integer(1)
    for i in range(1, n):
        expr *= principal[i - 1] ** (-(spec.weight[i - 1] + 2))
    arg = sp.Integer(0)
    for i in range(1, n):
        arg -= spec.mu_left[n - i - 1] * shifted[i - 1] / principal[i - 1]
    return DualKernel(n, expr * sp.exp(sp.together(arg)))


# ---------------------------------------------------------------------------
# dual Whittaker functional values and uniqueness
# ---------------------------------------------------------------------------


def _monomials_of_degree(n: int, d: int) -> list[sp.Expr]:
    xs = cell_coords(n)
    if d == 0:
        return [sp.Integer(1)]
    from sympy.polys.monomials import itermonomials

    monos = set()
    for m in itermonomials(list(xs), d):
        total = sum(sp.degree(m, x) for x in xs)
        if total == d:
            monos.add(m)
    return sorted(monos, key=sp.default_sort_key)


def dual_whittaker_values(n: int, weight: Weight, mu_left, D: int) -> dict:
    """Values of the normalized dual Whittaker functional on x-monomials.

    The functional is characterized by <w| f_i = mu^L_i <w| (simple),
    <w| f_root = 0 (non-simple), <w| vac> = 1.  Values are found degree by
    degree from exact linear solves; generic weight required.
    """
    rank = n - 1
    mu_left = tuple(sp.sympify(m) for m in mu_left)
    table = derive_generator_fields(n, tuple(weight.components))
    # f-fields carry polynomial multipliers of degree up to 2, so one
    # covariance equation couples values across neighbouring degrees;
    # solve the whole degree window at once.  Equations from sources up
    # to degree D - 2 keep every appearing monomial within degree D.
    def attempt(pad: int):
        unknowns: dict[sp.Expr, sp.Dummy] = {}
        for d in range(1, D + pad + 1):
            for k, m in enumerate(_monomials_of_degree(n, d)):
                unknowns[m] = sp.Dummy(f"v{d}_{k}")

        def val(mexpr):
            if mexpr == 1:
                return sp.Integer(1)
            return unknowns[mexpr]

        eqs = []
        for d in range(0, D + pad - 1):
            for u in _monomials_of_degree(n, d):
                for root in positive_roots(rank):
                    target = mu_left[root[0] - 1] if root[0] == root[1] \
                        else sp.Integer(0)
                    img = sp.expand(table[("f",) + root].apply_expr(u))
                    lhs = sp.Integer(0)
                    poly = sp.Poly(img, *cell_coords(n))
                    for mono, coeff in zip(poly.monoms(), poly.coeffs()):
                        mexpr = sp.prod(
                            [x**p for x, p in zip(cell_coords(n), mono)]
                        )
                        lhs += coeff * val(mexpr)
                    eqs.append(sp.Eq(lhs, target * val(u)))
        sol = sp.solve(eqs, list(unknowns.values()), dict=True)
        if len(sol) != 1:
            return None
        dummies = set(unknowns.values())
        out = {}
        for m, s in unknowns.items():
            deg = sum(sp.degree(m, x) for x in cell_coords(n) if m.has(x))
            if deg > D:
                continue  # padding degrees may stay underdetermined
            v = sol[0].get(s)
            if v is None or v.free_symbols & dummies:
                return None
            out[m] = sp.together(v)
        return out

    for pad in (1, 2, 3):
        out = attempt(pad)
        if out is not None:
            return out
    raise RuntimeError("dual functional not uniquely determined")


def whittaker_uniqueness_rank(n: int, spec: WhittakerSpec, D: int) -> bool:
    """Check the eigen-system e_i v = mu_i v has a 1-dim solution space <= D."""
    rank = n - 1
    xs = cell_coords(n)
    monos: list[sp.Expr] = []
    for d in range(D + 1):
        monos.extend(_monomials_of_degree(n, d))
    coeffs = {m: sp.Dummy(f"c{k}") for k, m in enumerate(monos)}
    v = sum(c * m for m, c in coeffs.items())
    table = derive_generator_fields(n, tuple(spec.weight.components))
    eqs = []
    for i in range(1, rank + 1):
        img = sp.expand(table[("e", i, i)].apply_expr(v) - spec.mu_right[i - 1] * v)
        img, _ = truncate_poly(n, img, D - 1)
        poly = sp.Poly(img, *xs) if img != 0 else None
        if poly is None:
            continue
        eqs.extend(poly.coeffs())
    unknowns = list(coeffs.values())
    mat, _ = sp.linear_eq_to_matrix(eqs, unknowns)
    null = mat.nullspace()
    # top-degree coefficients are only partially constrained (truncation
    # tail); uniqueness is measured on the projection below the top degree.
    keep = [k for k, m in enumerate(monos)
            if sum(sp.degree(m, x) for x in xs if m.has(x)) < D]
    proj = sp.Matrix([[vec[k] for k in keep] for vec in null])
    return proj.rank() == 1
