"""Exact PBW engine for U(sl(n)) with symbolic coefficients.

Basis conventions
-----------------
Positive roots of sl(n) are labelled by pairs (i, j) with 1 <= i <= j <= rank,
meaning the root alpha_i + ... + alpha_j.  The corresponding root vectors are
realized inside gl(n) matrix units as

    e_(i,j) -> E_{i, j+1},      f_(i,j) -> E_{j+1, i},      h_i -> E_ii - E_{i+1,i+1}.

Nested commutators then satisfy e_(i,j) = [e_i, e_(i+1,j)] and
f_(i,j) = -[f_i, f_(i+1,j)]; for sl(3) this reproduces the conventions
[e1, e2] = e12 and -[f1, f2] = f12.

The PBW order is: all f's (sorted by root height, then by starting index),
then h_1..h_rank, then all e's (same root order).  Coefficients are sympy
expressions; structure constants are exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import sympy as sp

from .params import lam


# ---------------------------------------------------------------------------
# generator bookkeeping
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def positive_roots(rank: int) -> tuple[tuple[int, int], ...]:
    """Roots (i, j), height-then-lex order."""
    roots = [(i, j) for i in range(1, rank + 1) for j in range(i, rank + 1)]
    roots.sort(key=lambda r: (r[1] - r[0], r[0]))
    return tuple(roots)


@lru_cache(maxsize=None)
def generator_list(rank: int) -> tuple[tuple, ...]:
    """All generators in PBW order: tuples ('f', i, j), ('h', i), ('e', i, j)."""
    roots = positive_roots(rank)
    gens: list[tuple] = [("f",) + r for r in roots]
    gens += [("h", i) for i in range(1, rank + 1)]
    gens += [("e",) + r for r in roots]
    return tuple(gens)


@lru_cache(maxsize=None)
def generator_index(rank: int) -> dict:
    return {g: k for k, g in enumerate(generator_list(rank))}


def generator_name(gen: tuple) -> str:
    if gen[0] == "h":
        return f"h{gen[1]}"
    kind, i, j = gen
    return f"{kind}{i}" if i == j else f"{kind}{i}{j}"


@lru_cache(maxsize=None)
def generator_matrix(rank: int, gen: tuple) -> sp.ImmutableMatrix:
    n = rank + 1
    m = sp.zeros(n, n)
    if gen[0] == "h":
        i = gen[1]
        m[i - 1, i - 1] = 1
        m[i, i] = -1
    elif gen[0] == "e":
        _, i, j = gen
        m[i - 1, j] = 1
    else:
        _, i, j = gen
        m[j, i - 1] = 1
    return sp.ImmutableMatrix(m)


def _matrix_to_generators(rank: int, m: sp.Matrix) -> list[tuple[sp.Rational, int]]:
    """Decompose a traceless matrix into generator contributions."""
    n = rank + 1
    gidx = generator_index(rank)
    out: list[tuple[sp.Rational, int]] = []
    for a in range(n):
        for b in range(n):
            c = m[a, b]
            if c == 0 or a == b:
                continue
            if a < b:
                out.append((c, gidx[("e", a + 1, b)]))
            else:
                out.append((c, gidx[("f", b + 1, a)]))
    # diagonal part: sum d_a E_aa with sum d_a = 0 equals
    # sum_k (d_1 + ... + d_k) h_k
    partial = sp.Integer(0)
    for k in range(1, n):
        partial += m[k - 1, k - 1]
        if partial != 0:
            out.append((partial, gidx[("h", k)]))
    return out


@lru_cache(maxsize=None)
def commute_generators(rank: int, a: int, b: int) -> tuple[tuple[sp.Rational, int], ...]:
    """[g_a, g_b] as a list of (coeff, generator-index)."""
    gens = generator_list(rank)
    ma = generator_matrix(rank, gens[a])
    mb = generator_matrix(rank, gens[b])
    return tuple(_matrix_to_generators(rank, ma * mb - mb * ma))


# ---------------------------------------------------------------------------
# word normalization (integer structure constants, cached)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _normalize_word(rank: int, word: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], sp.Rational], ...]:
    """PBW normal form of a product word of generator indices.

    Returns ((exponent-tuple, coeff), ...) where exponent tuples are over
    generator_list(rank).
    """
    for k in range(len(word) - 1):
        if word[k] > word[k + 1]:
            swapped = word[:k] + (word[k + 1], word[k]) + word[k + 2:]
            acc: dict[tuple[int, ...], sp.Rational] = {}
            for exps, c in _normalize_word(rank, swapped):
                acc[exps] = acc.get(exps, sp.Integer(0)) + c
            for cc, g in commute_generators(rank, word[k], word[k + 1]):
                contracted = word[:k] + (g,) + word[k + 2:]
                for exps, c in _normalize_word(rank, contracted):
                    acc[exps] = acc.get(exps, sp.Integer(0)) + cc * c
            return tuple((e, c) for e, c in acc.items() if c != 0)
    # already ordered
    ngen = len(generator_list(rank))
    exps = [0] * ngen
    for g in word:
        exps[g] += 1
    return ((tuple(exps), sp.Integer(1)),)


def _exps_to_word(exps: tuple[int, ...]) -> tuple[int, ...]:
    word: list[int] = []
    for g, p in enumerate(exps):
        word.extend([g] * p)
    return tuple(word)


# ---------------------------------------------------------------------------
# UEAElement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UEAElement:
    """Element of U(sl(n)) in PBW normal form.

    ``terms`` maps exponent tuples (over generator_list(rank)) to sympy
    coefficients.
    """

    rank: int
    terms: tuple  # tuple of (exps, coeff) pairs, canonically sorted

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def from_dict(rank: int, d: dict) -> "UEAElement":
        items = []
        for exps, c in d.items():
            c = sp.sympify(c)
            if c == 0:
                continue
            c = sp.together(sp.expand(c))
            if c == 0:
                continue
            items.append((tuple(exps), c))
        items.sort(key=lambda t: t[0])
        return UEAElement(rank, tuple(items))

    @staticmethod
    def zero(rank: int) -> "UEAElement":
        return UEAElement(rank, ())

    @staticmethod
    def one(rank: int) -> "UEAElement":
        ngen = len(generator_list(rank))
        return UEAElement.from_dict(rank, {tuple([0] * ngen): sp.Integer(1)})

    @staticmethod
    def generator(rank: int, gen: tuple) -> "UEAElement":
        ngen = len(generator_list(rank))
        idx = generator_index(rank)[gen]
        exps = [0] * ngen
        exps[idx] = 1
        return UEAElement.from_dict(rank, {tuple(exps): sp.Integer(1)})

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other: "UEAElement"):
        if self.rank != other.rank:
            raise ValueError("rank mismatch between UEA elements")

    def __add__(self, other: "UEAElement") -> "UEAElement":
        self._check(other)
        d = dict(self.terms)
        for exps, c in other.terms:
            d[exps] = d.get(exps, sp.Integer(0)) + c
        return UEAElement.from_dict(self.rank, d)

    def __sub__(self, other: "UEAElement") -> "UEAElement":
        return self + other.scale(-1)

    def scale(self, c) -> "UEAElement":
        c = sp.sympify(c)
        return UEAElement.from_dict(self.rank, {e: c * cc for e, cc in self.terms})

    def __mul__(self, other):
        if isinstance(other, UEAElement):
            self._check(other)
            out: dict[tuple[int, ...], sp.Expr] = {}
            for ea, ca in self.terms:
                wa = _exps_to_word(ea)
                for eb, cb in other.terms:
                    word = wa + _exps_to_word(eb)
                    for exps, c in _normalize_word(self.rank, word):
                        out[exps] = out.get(exps, sp.Integer(0)) + ca * cb * c
            return UEAElement.from_dict(self.rank, out)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, UEAElement):
            return NotImplemented
        if self.rank != other.rank:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.rank, self.terms))

    # -- structure maps ------------------------------------------------------

    def antiinvolution(self) -> "UEAElement":
        """Chevalley antiinvolution: e <-> f, h fixed, products reversed."""
        gens = generator_list(self.rank)
        gidx = generator_index(self.rank)
        swap = {}
        for k, g in enumerate(gens):
            if g[0] == "e":
                swap[k] = gidx[("f",) + g[1:]]
            elif g[0] == "f":
                swap[k] = gidx[("e",) + g[1:]]
            else:
                swap[k] = k
        out: dict[tuple[int, ...], sp.Expr] = {}
        for exps, c in self.terms:
            word = tuple(swap[g] for g in reversed(_exps_to_word(exps)))
            for e2, c2 in _normalize_word(self.rank, word):
                out[e2] = out.get(e2, sp.Integer(0)) + c * c2
        return UEAElement.from_dict(self.rank, out)

    # -- inspection ----------------------------------------------------------

    def degrees(self, kind: str) -> int:
        """Max total degree in generators of the given kind ('f','h','e')."""
        gens = generator_list(self.rank)
        best = 0
        for exps, _ in self.terms:
            d = sum(p for g, p in zip(gens, exps) if g[0] == kind)
            best = max(best, d)
        return best

    def serialize(self) -> str:
        """Canonical plain-text form (sorted PBW monomials)."""
        gens = generator_list(self.rank)
        if not self.terms:
            return "0"
        parts = []
        for exps, c in sorted(self.terms):
            mono = "*".join(
                generator_name(g) + (f"^{p}" if p > 1 else "")
                for g, p in zip(gens, exps)
                if p
            )
            coeff = sp.sstr(sp.factor(sp.together(c)))
            parts.append(f"({coeff})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def gen(rank: int, name_kind: str, i: int, j: int | None = None) -> UEAElement:
    """Convenience constructor: gen(r,'e',1), gen(r,'f',1,2), gen(r,'h',2)."""
    if name_kind == "h":
        return UEAElement.generator(rank, ("h", i))
    if j is None:
        j = i
    return UEAElement.generator(rank, (name_kind, i, j))


def commutator(a: UEAElement, b: UEAElement) -> UEAElement:
    return a * b - b * a


def pbw_normal_form(factors: list[UEAElement]) -> UEAElement:
    """Product of a list of elements, in PBW normal form."""
    if not factors:
        raise ValueError("empty product")
    acc = factors[0]
    for f in factors[1:]:
        acc = acc * f
    return acc


def fundamental_coweight(rank: int, i: int) -> UEAElement:
    """Lambda_i in the Cartan subalgebra with [Lambda_i, e_j] = delta_ij e_j."""
    from .params import cartan_data

    cd = cartan_data(rank + 1)
    acc = UEAElement.zero(rank)
    for j in range(1, rank + 1):
        acc = acc + gen(rank, "h", j).scale(cd.inverse_cartan[i - 1, j - 1])
    return acc


def casimir2(n: int) -> UEAElement:
    """Quadratic Casimir of sl(n) in PBW form."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rank = n - 1
    from .params import cartan_data

    cd = cartan_data(n)
    acc = UEAElement.zero(rank)
    for r in positive_roots(rank):
        e = UEAElement.generator(rank, ("e",) + r)
        f = UEAElement.generator(rank, ("f",) + r)
        acc = acc + e * f + f * e
    for i in range(1, rank + 1):
        for j in range(1, rank + 1):
            acc = acc + (gen(rank, "h", i) * gen(rank, "h", j)).scale(
                cd.inverse_cartan[i - 1, j - 1]
            )
    return acc


def chevalley_antiinvolution(a: UEAElement) -> UEAElement:
    return a.antiinvolution()


def vacuum_expectation(elt: UEAElement, weight=None):
    """<vac| elt |vac> for a highest-weight vector of the given weight.

    Terms containing any e (kills the right vacuum) or any f (kills the left
    one) drop; pure-h monomials evaluate at the weight.  Defaults to the
    generic symbolic weight lam_i.
    """
    rank = elt.rank
    gens = generator_list(rank)
    if weight is None:
        weight = [lam(i) for i in range(1, rank + 1)]
    vals = list(weight)
    acc = sp.Integer(0)
    for exps, c in elt.terms:
        term = c
        ok = True
        for g, p in zip(gens, exps):
            if p == 0:
                continue
            if g[0] in ("e", "f"):
                ok = False
                break
            term *= vals[g[1] - 1] ** p
        if ok:
            acc += term
    return sp.expand(acc)
