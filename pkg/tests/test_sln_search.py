"""P_j polynomial search: recurrence, pinning, and certificates. [DERIVED]"""

import pytest
import sympy as sp

from artifact.algebra import fundamental_coweight, gen
from artifact.params import muR, muR_vector
from artifact.sln_search import (ansatz_space, depth_truncate,
                                 prop48_report, reduce_right,
                                 setup_recurrence, solution_record, solve_P,
                                 whittaker_image_consistency)
from artifact.whittaker import WhittakerSpec


def test_reduce_right_simple_e_to_mu():
    mu = muR_vector(1)
    u = gen(1, "f", 1) * gen(1, "e", 1)
    red = reduce_right(u, mu)
    # the PBW normal form already has e rightmost, so f e -> mu f
    assert red.serialize() == gen(1, "f", 1).scale(mu[0]).serialize()


def test_reduce_right_kills_nonsimple():
    mu = muR_vector(2)
    e13 = gen(2, "e", 1, 2)  # non-simple raising vector
    assert reduce_right(e13, mu).is_zero()


def test_depth_truncate_counts_root_height():
    u = gen(2, "f", 1) * gen(2, "f", 2)  # depth 2
    assert depth_truncate(u, 1).is_zero()
    assert not depth_truncate(u, 2).is_zero()


def test_ansatz_space_sizes():
    s = ansatz_space(3, 0, 2)
    # 2 simple f's + 2 coweights, total degree <= 2
    assert len(s.basis) == 15
    s2 = ansatz_space(3, 0, 2, include_nonsimple=True)
    assert len(s2.basis) == 21


def test_setup_recurrence_rejects_bad_level():
    with pytest.raises(ValueError):
        setup_recurrence(3, 5)
    with pytest.raises(ValueError):
        setup_recurrence(3, 0, d=0)


def test_solve_n2_matches_raising_pair():
    """n=2: P_1 is the constant mu_1 and P_0 = Lambda_1 + const."""
    ps = solve_P(2, 0)
    assert ps.status == "OK"
    chain = ps.chain_dict()
    top = chain[1]
    assert len(top.terms) == 1 and not any(top.terms[0][0])
    norm = top.terms[0][1] / muR(1)
    diff = chain[0] - fundamental_coweight(1, 1).scale(norm)
    assert all(not any(e) for e, _ in diff.terms)


def test_solve_n3_certificate():
    ps = solve_P(3, 0)
    assert ps.status == "OK"
    assert ps.certificate["ok"]
    assert ps.certificate["module_check"]["ok"]
    # exact commutator residuals all zero
    assert all(v == "0" for v in ps.certificate["commutator_residuals"]
               .values())


def test_solve_n3_image_consistency():
    ps = solve_P(3, 0)
    spec = WhittakerSpec.generic(3)
    rep = whittaker_image_consistency(3, ps.chain_dict(), spec, D=5)
    assert rep["ok"], rep


def test_prop48_n3():
    rep = prop48_report(3)
    assert rep["status"] == "OK"
    assert rep["ok"], rep


def test_alpha_beta_combination():
    """Only alpha*mu + beta is pinned; the recorded split satisfies the
    normalization alpha + beta = 1 and alpha*mu + beta = -1."""
    ps = solve_P(3, 0)
    for level, (a, b) in ps.alpha_beta:
        mu = muR_vector(2)[level]
        assert sp.cancel(a + b - 1) == 0
        assert sp.cancel(a * mu + b + 1) == 0


def test_solution_record_roundtrip():
    ps = solve_P(2, 0)
    rec = solution_record(ps)
    import json

    text = json.dumps(rec, sort_keys=True, default=str)
    back = json.loads(text)
    assert back["n"] == 2 and back["status"] == "OK"
    assert back["certificate"]["ok"] is True
