"""Formal parameters, weights and Cartan data for sl(n).

Coefficients throughout the symbolic layer are sympy expressions in the
formal weight components ``lam_i``, the left Whittaker eigenvalues
``muL_i`` and the right Whittaker eigenvalues ``muR_i``.  The helpers here
centralize symbol creation so every module agrees on names.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import sympy as sp


@lru_cache(maxsize=None)
def lam(i: int) -> sp.Symbol:
    """Formal weight component lambda_i (1-based)."""
    return sp.Symbol(f"lam{i}")


@lru_cache(maxsize=None)
def muL(i: int) -> sp.Symbol:
    """Formal left Whittaker eigenvalue mu^L_i (1-based)."""
    return sp.Symbol(f"muL{i}")


@lru_cache(maxsize=None)
def muR(i: int) -> sp.Symbol:
    """Formal right Whittaker eigenvalue mu^R_i (1-based)."""
    return sp.Symbol(f"muR{i}")


@lru_cache(maxsize=None)
def phi(i: int) -> sp.Symbol:
    """Toda coordinate phi_i (1-based)."""
    return sp.Symbol(f"phi{i}")


def lam_vector(rank: int) -> tuple[sp.Symbol, ...]:
    return tuple(lam(i) for i in range(1, rank + 1))


def muL_vector(rank: int) -> tuple[sp.Symbol, ...]:
    return tuple(muL(i) for i in range(1, rank + 1))


def muR_vector(rank: int) -> tuple[sp.Symbol, ...]:
    return tuple(muR(i) for i in range(1, rank + 1))


@dataclass(frozen=True)
class Weight:
    """An sl(n) weight in the lambda-coordinates (values at h_1..h_{n-1}).

    Components are exact sympy scalars (rationals or symbols).  Integer
    shift vectors may be added, e.g. ``w + (1, 0)``.
    """

    components: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "components", tuple(sp.sympify(c) for c in self.components)
        )

    @property
    def rank(self) -> int:
        return len(self.components)

    def __add__(self, shift) -> "Weight":
        shift = tuple(shift.components) if isinstance(shift, Weight) else tuple(shift)
        if len(shift) != self.rank:
            raise ValueError("rank mismatch in weight shift")
        return Weight(tuple(c + sp.sympify(s) for c, s in zip(self.components, shift)))

    def __sub__(self, shift) -> "Weight":
        shift = tuple(shift.components) if isinstance(shift, Weight) else tuple(shift)
        return self.__add__(tuple(-sp.sympify(s) for s in shift))

    def __getitem__(self, i: int):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)


def generic_weight(rank: int) -> Weight:
    return Weight(lam_vector(rank))


@dataclass(frozen=True)
class CartanData:
    """Cartan matrix data for sl(n); rank = n - 1."""

    rank: int
    cartan_matrix: sp.ImmutableMatrix
    inverse_cartan: sp.ImmutableMatrix
    rho: Weight

    @staticmethod
    def for_rank(rank: int) -> "CartanData":
        if rank < 1:
            raise ValueError("rank must be >= 1")
        a = sp.zeros(rank, rank)
        for i in range(rank):
            a[i, i] = 2
            if i + 1 < rank:
                a[i, i + 1] = -1
                a[i + 1, i] = -1
        a = sp.ImmutableMatrix(a)
        return CartanData(
            rank=rank,
            cartan_matrix=a,
            inverse_cartan=sp.ImmutableMatrix(a.inv()),
            # rho has value 1 on every simple coroot.
            rho=Weight(tuple(sp.Integer(1) for _ in range(rank))),
        )

    def quadratic_form(self, w1: Weight, w2: Weight):
        """<w1, w2> := sum_ij (A^-1)_ij w1_i w2_j."""
        acc = sp.Integer(0)
        for i in range(self.rank):
            for j in range(self.rank):
                acc += self.inverse_cartan[i, j] * w1[i] * w2[j]
        return sp.expand(acc)


@lru_cache(maxsize=None)
def cartan_data(n: int) -> CartanData:
    """Cartan data for sl(n) (argument is n, not the rank)."""
    return CartanData.for_rank(n - 1)
