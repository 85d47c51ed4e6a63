"""Polynomial-model realization checked against bracket oracles. [DERIVED]"""

import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.algebra import commute_generators, gen, generator_list
from artifact.borel_weil import (apply_cartan_exponential, apply_generator,
                                 apply_uea, cell_coords, monomial_weights,
                                 realized_generator, truncate_poly, vacuum,
                                 weight_component_decomposition)
from artifact.params import Weight, lam, phi


def _tv(n, poly, weight, D=8):
    v = vacuum(n, weight, D)
    return type(v)(n, sp.expand(poly), v.weight, D)


def test_sl2_realized_fields_on_monomials():
    x = cell_coords(2)[0]
    w = Weight((lam(1),))
    e = realized_generator(2, ("e", 1, 1), w)
    f = realized_generator(2, ("f", 1, 1), w)
    h = realized_generator(2, ("h", 1), w)
    for a in range(4):
        v = _tv(2, x ** a, w)
        assert sp.expand(apply_generator(e, v).poly - a * x ** (a - 1)) == 0
        assert sp.expand(
            apply_generator(f, v).poly - (lam(1) - a) * x ** (a + 1)) == 0
        assert sp.expand(
            apply_generator(h, v).poly - (lam(1) - 2 * a) * x ** a) == 0


def _act(n, g, v):
    return apply_generator(realized_generator(n, g, v.weight), v)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2), st.integers(0, 2))
def test_realization_respects_brackets_sl3(gi, gj):
    """[rho(a), rho(b)] = rho([a,b]) on a generic polynomial vector."""
    n, rank = 3, 2
    gens = generator_list(rank)
    ga, gb = gens[gi], gens[gj + 3]
    xs = cell_coords(n)
    w = Weight((lam(1), lam(2)))
    v = _tv(n, 1 + xs[0] + 2 * xs[1] * xs[2] + xs[0] ** 2, w, D=6)
    lhs = _act(n, ga, _act(n, gb, v)).poly - _act(n, gb, _act(n, ga, v)).poly
    rhs = sp.Integer(0)
    idx = {g: k for k, g in enumerate(gens)}
    for coeff, k in commute_generators(rank, idx[ga], idx[gb]):
        rhs += coeff * _act(n, gens[k], v).poly
    kept, _ = truncate_poly(n, sp.expand(lhs - rhs), 4)
    assert sp.simplify(kept) == 0


def test_apply_uea_matches_iterated_generators():
    w = Weight((lam(1),))
    x = cell_coords(2)[0]
    v = _tv(2, 1 + x, w, D=6)
    u = gen(1, "e", 1) * gen(1, "f", 1)
    got = apply_uea(u, v).poly
    want = _act(2, ("e", 1, 1), _act(2, ("f", 1, 1), v)).poly
    assert sp.expand(got - want) == 0


def test_vacuum_is_highest_weight():
    w = Weight((lam(1), lam(2)))
    v = vacuum(3, w, 6)
    for i in (1, 2):
        assert _act(3, ("e", i, i), v).poly == 0
        assert sp.expand(
            _act(3, ("h", i), v).poly - w[i - 1] * v.poly) == 0


def test_cartan_exponential_on_monomial():
    w = Weight((lam(1),))
    x = cell_coords(2)[0]
    v = _tv(2, x ** 2, w, D=6)
    got = apply_cartan_exponential((phi(1),), v)
    want = sp.exp((lam(1) - 4) * phi(1)) * x ** 2
    assert sp.simplify(got - want) == 0


def test_weight_component_decomposition_sl2():
    w = Weight((lam(1),))
    x = cell_coords(2)[0]
    v = _tv(2, 3 + x + 5 * x ** 2, w, D=6)
    comps = weight_component_decomposition(v)
    polys = {k: sp.expand(c.poly if hasattr(c, "poly") else c)
             for k, c in comps.items()}
    assert len(polys) == 3
    assert any(sp.expand(p - 3) == 0 for p in polys.values())


def test_monomial_weights_additive():
    w = Weight((lam(1), lam(2)))
    xs = cell_coords(3)
    wt = monomial_weights(3, xs[0] * xs[1], w)
    wt0 = monomial_weights(3, xs[0], w)
    wt1 = monomial_weights(3, xs[1], w)
    assert tuple(a + b - c for a, b, c in zip(wt0, wt1, [
        w[0], w[1]])) == tuple(wt)
