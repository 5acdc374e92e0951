from collections import Counter
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from htbgg.bgg import L_of_complex, PolyMatrix, SComplex, poly_add
from htbgg.exactla import GF, QQ
from htbgg.gallery import build_example, standard_gallery
from htbgg.lamcomplex import random_ht_complex
from htbgg.lammod import FreeModule
from htbgg.minimize import (cancel_step, complex_cohomology_dims, decompose_bundle, minimize_complex,
                            predicted_minimal_terms)


def same(A, B, F):
    if (A.rows, A.cols) != (B.rows, B.cols):
        return False
    for k in set(A.entries) | set(B.entries):
        neg = {m: F.norm(-c) for m, c in B.entries.get(k, {}).items()}
        if any(F.norm(c) for c in poly_add(A.entries.get(k, {}), neg, F).values()):
            return False
    return True


def ident(k):
    return PolyMatrix(k, k, {(i, i): {0: 1} for i in range(k)})


def random_G(seed, F=GF(32003)):
    rng = np.random.default_rng(seed)
    return random_ht_complex(rng, int(rng.integers(2, 4)), 2, 2, 3, F)


def test_contractible_pair_vanishes():
    C = SComplex(2, {0: [0], 1: [0]}, {0: PolyMatrix(1, 1, {(0, 0): {0: 3}})}, None, QQ)
    M = minimize_complex(C)
    assert not any(M.terms.values())


def test_koszul_is_already_minimal():
    C = L_of_complex(FreeModule([0], 3))
    assert C.is_minimal()
    assert minimize_complex(C).twist_multisets() == C.twist_multisets()


def test_null_correlation_decomposition():
    rep = decompose_bundle(build_example("null_correlation", n=3, i=1).G)
    assert rep.r == {0: 4} and rep.z0_rank == 6 and rep.bundle_rank == 2 and rep.euler_rank == 2
    assert rep.to_json()["minimal_complex"]["-1"] == "O(-1)^5"


def test_null_correlation_p5():
    ranks = [decompose_bundle(build_example("null_correlation", n=5, i=i).G).bundle_rank for i in (1, 2)]
    assert ranks == [4, 5]


def test_horrocks_mumford_seed():
    ex = build_example("horrocks_mumford_seed")
    rep = decompose_bundle(ex.G)
    assert rep.z0_rank == 12 and rep.bundle_rank == 12 and not rep.r


def test_koszul_cohomology_dims():
    G = build_example("koszul", n=3, j=1).G
    assert complex_cohomology_dims(G) == {(0, d): comb(4, 1 - d) for d in range(-3, 2)}


@pytest.mark.parametrize("ex", standard_gallery(), ids=lambda e: e.name)
def test_minimal_terms_match_prediction(ex):
    M = minimize_complex(L_of_complex(ex.G))
    assert M.is_minimal() and M.verify()["ok"]
    pred = {s: c for s, c in predicted_minimal_terms(ex.G).items() if c}
    assert M.twist_multisets() == pred


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6))
def test_sweep_order_irrelevant(seed):
    C = L_of_complex(random_G(seed))
    a = minimize_complex(C, order="left").twist_multisets()
    b = minimize_complex(C, order="right").twist_multisets()
    assert a == b


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6))
def test_tracking_maps_are_chain_maps(seed):
    G = random_G(seed)
    F = G.field
    C = L_of_complex(G)
    M, tr, cancelled = minimize_complex(C, track=True)
    for s in M.terms:
        assert same(tr.proj[s].matmul(tr.incl[s], F), ident(len(M.term(s))), F)
    for s in C.diffs:
        if s in M.terms and (s + 1) in M.terms:
            lhs = C.diff(s).matmul(tr.incl[s], F)
            rhs = tr.incl[s + 1].matmul(M.diff(s), F)
            assert same(lhs, rhs, F)
            lhs = M.diff(s).matmul(tr.proj[s], F)
            rhs = tr.proj[s + 1].matmul(C.diff(s), F)
            assert same(lhs, rhs, F)
    total = sum(cancelled.values())
    assert sum(len(t) for t in C.terms.values()) - sum(len(t) for t in M.terms.values()) == 2 * total


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6))
def test_rank_formula_random(seed):
    G = random_G(seed, QQ if seed % 2 else GF(32003))
    rep = decompose_bundle(G)
    assert rep.z0_rank == sum(rep.r.values()) + rep.euler_rank
    assert rep.bundle_rank == rep.euler_rank


def test_cancel_step_without_constants_is_noop():
    C = L_of_complex(FreeModule([0], 2))
    assert cancel_step(C, -1) is C


def test_cancelled_counter():
    G = build_example("null_correlation", n=3, i=1).G
    _, _, cancelled = minimize_complex(L_of_complex(G), track=True)
    assert isinstance(cancelled, Counter) and sum(cancelled.values()) > 0
