"""Borel-Weil realization of principal-series modules V_lambda.

The module is realized on polynomials in the cell coordinates x_{ij}
(1 <= i < j <= n), the entries of a unit upper-triangular matrix X.  For a
generator with n x n matrix a, the right action is computed from the
first-order Gauss decomposition X (1 + t a) = b(t) X'(t) (t^2 = 0, b lower
triangular):

    vector field:  delta X = striclty_upper(X a X^{-1}) X
    multiplier:    sum_i lambda_i * (L_11 + ... + L_ii),  L = lower part of X a X^{-1}

which reproduces the printed sl(2)/sl(3) operators exactly (this is pinned
by tests).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import sympy as sp

from .algebra import UEAElement, generator_list, generator_matrix, _exps_to_word
from .params import Weight, cartan_data, lam


@lru_cache(maxsize=None)
def cell_coords(n: int) -> tuple[sp.Symbol, ...]:
    """Coordinates x_{ij}, ordered by (j - i, i) to match root order."""
    pairs = cell_pairs(n)
    return tuple(sp.Symbol(f"x{i}_{j}") for i, j in pairs)


@lru_cache(maxsize=None)
def cell_pairs(n: int) -> tuple[tuple[int, int], ...]:
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    pairs.sort(key=lambda p: (p[1] - p[0], p[0]))
    return tuple(pairs)


@lru_cache(maxsize=None)
def cell_matrix(n: int) -> sp.ImmutableMatrix:
    m = sp.eye(n)
    for (i, j), x in zip(cell_pairs(n), cell_coords(n)):
        m[i - 1, j - 1] = x
    return sp.ImmutableMatrix(m)


@dataclass(frozen=True)
class RealizedGenerator:
    """First-order differential operator sum_ij q_ij(x) d/dx_ij + p(x)."""

    n: int
    fields: tuple  # tuple of (coordinate-symbol, coefficient-expr)
    multiplier: sp.Expr

    def apply_expr(self, expr: sp.Expr) -> sp.Expr:
        acc = self.multiplier * expr
        for x, q in self.fields:
            acc += q * sp.diff(expr, x)
        return sp.expand(acc)


@dataclass(frozen=True)
class TruncatedVector:
    """Degree-truncated polynomial vector of V_lambda."""

    n: int
    poly: sp.Expr
    weight: Weight
    truncation_degree: int
    overflow: bool = False  # set when a degree-D monomial leaked past D

    def __add__(self, other: "TruncatedVector") -> "TruncatedVector":
        assert self.n == other.n and self.truncation_degree == other.truncation_degree
        return TruncatedVector(
            self.n,
            sp.expand(self.poly + other.poly),
            self.weight,
            self.truncation_degree,
            self.overflow or other.overflow,
        )

    def scale(self, c) -> "TruncatedVector":
        return TruncatedVector(
            self.n, sp.expand(sp.sympify(c) * self.poly), self.weight,
            self.truncation_degree, self.overflow,
        )


def truncate_poly(n: int, expr: sp.Expr, degree: int) -> tuple[sp.Expr, bool]:
    """Drop monomials of total x-degree > degree; report whether any dropped."""
    xs = cell_coords(n)
    expr = sp.expand(expr)
    kept = sp.Integer(0)
    overflow = False
    for term in sp.Add.make_args(expr):
        d = sum(sp.degree(term, x) for x in xs if term.has(x))
        if d <= degree:
            kept += term
        else:
            overflow = True
    return kept, overflow


@lru_cache(maxsize=None)
def derive_generator_fields(n: int, weight_components: tuple | None = None) -> dict:
    """Realized generators for sl(n) at the given weight (default symbolic).

    Returns {generator-tuple: RealizedGenerator} for every PBW generator
    (including non-simple root vectors).
    """
    if weight_components is None:
        weight_components = tuple(lam(i) for i in range(1, n))
    rank = n - 1
    x_mat = cell_matrix(n)
    x_inv = x_mat.inv()
    xs = cell_coords(n)
    pairs = cell_pairs(n)
    out = {}
    for g in generator_list(rank):
        a = generator_matrix(rank, g)
        m = sp.expand(x_mat * a * x_inv)
        lower = sp.zeros(n, n)
        upper = sp.zeros(n, n)
        for i in range(n):
            for j in range(n):
                if i >= j:
                    lower[i, j] = m[i, j]
                else:
                    upper[i, j] = m[i, j]
        delta = sp.expand(upper * x_mat)
        fields = []
        for (i, j), x in zip(pairs, xs):
            q = sp.expand(delta[i - 1, j - 1])
            if q != 0:
                fields.append((x, q))
        mult = sp.Integer(0)
        partial = sp.Integer(0)
        for i in range(rank):
            partial += lower[i, i]
            mult += weight_components[i] * partial
        out[g] = RealizedGenerator(n, tuple(fields), sp.expand(mult))
    return out


def vacuum(n: int, weight: Weight | None = None, D: int = 8) -> TruncatedVector:
    if weight is None:
        weight = Weight(tuple(lam(i) for i in range(1, n)))
    return TruncatedVector(n, sp.Integer(1), weight, D)


def realized_generator(n: int, g: tuple, weight: Weight | None = None) -> RealizedGenerator:
    comps = None if weight is None else tuple(weight.components)
    table = derive_generator_fields(n, comps)
    return table[g]


def apply_generator(g: RealizedGenerator, v: TruncatedVector) -> TruncatedVector:
    res = g.apply_expr(v.poly)
    kept, overflow = truncate_poly(v.n, res, v.truncation_degree)
    return TruncatedVector(v.n, kept, v.weight, v.truncation_degree,
                           v.overflow or overflow)


def apply_uea(elt: UEAElement, v: TruncatedVector) -> TruncatedVector:
    """Apply a PBW element; rightmost generator acts first."""
    n = v.n
    table = derive_generator_fields(n, tuple(v.weight.components))
    gens = generator_list(elt.rank)
    acc = sp.Integer(0)
    overflow = v.overflow
    for exps, c in elt.terms:
        cur = v.poly
        for gi in reversed(_exps_to_word(exps)):
            cur = table[gens[gi]].apply_expr(cur)
            cur, of = truncate_poly(n, cur, v.truncation_degree)
            overflow = overflow or of
        acc += c * cur
    return TruncatedVector(n, sp.expand(acc), v.weight, v.truncation_degree, overflow)


# ---------------------------------------------------------------------------
# weights of monomials and the Cartan exponential
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def coordinate_weight(n: int, pair: tuple[int, int]) -> tuple:
    """h_k-eigenvalues of the coordinate x_{ij}: -(alpha_i + ... + alpha_{j-1})."""
    cd = cartan_data(n)
    rank = n - 1
    return tuple(
        -sum(cd.cartan_matrix[k, c - 1] for c in range(pair[0], pair[1]))
        for k in range(rank)
    )


def monomial_weights(n: int, term: sp.Expr, weight: Weight) -> tuple:
    """Exact h_k-eigenvalue vector of a single monomial."""
    rank = n - 1
    w = list(weight.components)
    for (i, j), x in zip(cell_pairs(n), cell_coords(n)):
        d = sp.degree(term, x) if term.has(x) else 0
        if d:
            cw = coordinate_weight(n, (i, j))
            for k in range(rank):
                w[k] += d * cw[k]
    return tuple(w)


def apply_cartan_exponential(phis, v: TruncatedVector) -> sp.Expr:
    """exp(sum_i phi_i h_i) applied to v; phis formal or numeric.

    Returns a sympy expression (the result leaves the polynomial model, each
    monomial being scaled by exp(sum phi_i * w_i)).
    """
    n = v.n
    acc = sp.Integer(0)
    for term in sp.Add.make_args(sp.expand(v.poly)):
        w = monomial_weights(n, term, v.weight)
        acc += term * sp.exp(sp.expand(sum(p * wk for p, wk in zip(phis, w))))
    return acc


def weight_component_decomposition(v: TruncatedVector) -> dict:
    """Split into h-weight-homogeneous parts: {weight-tuple: expr}."""
    out: dict[tuple, sp.Expr] = {}
    for term in sp.Add.make_args(sp.expand(v.poly)):
        w = monomial_weights(v.n, term, v.weight)
        out[w] = out.get(w, sp.Integer(0)) + term
    return out
