from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from htbgg.exactla import GF, QQ
from htbgg.gallery import build_example
from htbgg.lamcomplex import FreeComplex, conjugate, random_ht_complex
from htbgg.lammod import FreeModule, GradedLambdaModule
from htbgg.tate import (TateError, beilinson_terms, extract_ht, is_chain_map, is_isomorphic_minimal,
                        minimal_free_resolution, omega_name, regularity, tate_window)


def single(n, j, F=QQ):
    return FreeComplex({0: FreeModule([-j], n)}, {}, n, F)


CASES = [
    ("omega 2,1", lambda: single(2, 1)),
    ("omega 3,1", lambda: single(3, 1)),
    ("omega 3,2", lambda: single(3, 2)),
    ("null correlation", lambda: build_example("null_correlation", n=3, i=1).G),
    ("eilenberg maclane k", lambda: build_example("eilenberg_maclane", n=3, j=1, module="k").G),
    ("eilenberg maclane m2", lambda: build_example("eilenberg_maclane", n=3, j=2, module="m2").G),
]


@pytest.mark.parametrize("name,make", CASES, ids=[c[0] for c in CASES])
def test_window_strands_are_cohomology(name, make):
    G = make()
    W = tate_window(G, -3, 3)
    assert W.exact_ok, W.failures
    assert W.complex.is_minimal() and W.complex.verify_complex()["ok"]
    st_ = W.complex.strand_table()
    for (i, d), v in W.table.values.items():
        if W.lo <= i + d <= W.hi:
            assert st_.get((i, d), 0) == v, (i, d)


@pytest.mark.parametrize("name,make", CASES, ids=[c[0] for c in CASES])
def test_roundtrip(name, make):
    G = make()
    back = extract_ht(tate_window(G))
    res = is_isomorphic_minimal(back, G)
    assert res.status == "isomorphic"
    assert is_chain_map(res.maps, back, G)


def test_narrow_window_rejected():
    G = build_example("null_correlation", n=3, i=1).G
    W = tate_window(G, 0, 1)
    with pytest.raises(TateError):
        extract_ht(W)


def test_non_ht_rejected():
    with pytest.raises(TateError):
        tate_window(single(3, 0))


def test_regularity_of_omega():
    from htbgg.bgg import L_of_complex
    from htbgg.minimize import minimize_complex

    G = single(3, 1)
    r = regularity(G, minimize_complex(L_of_complex(G)))
    # Omega^1(1) has H^1 in twist -1 only, so it is 1-regular
    assert r <= 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_resolution_of_residue_field(n):
    k = GradedLambdaModule.trivial(n, 0)
    R, aug = minimal_free_resolution(k, 3)
    assert R.verify_complex()["ok"] and R.is_minimal()
    for s in range(4):
        assert len(R.term(-s)) == comb(n + s, n)


def test_not_isomorphic_strands():
    res = is_isomorphic_minimal(single(3, 1), single(3, 2))
    assert res.status == "not_isomorphic" and not res


def test_split_versus_null_correlation():
    nc = build_example("null_correlation", n=3, i=1).G
    split = FreeComplex(dict(nc.terms), {}, 3)
    res = is_isomorphic_minimal(split, nc, tries=8)
    assert res.status != "isomorphic"


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6))
def test_iso_search_on_conjugates(seed):
    rng = np.random.default_rng(seed)
    F = QQ if seed % 2 else GF(32003)
    G = random_ht_complex(rng, int(rng.integers(2, 4)), field=F)
    G2, _ = conjugate(G, rng)
    res = is_isomorphic_minimal(G, G2, seed=seed)
    assert res.status == "isomorphic" and is_chain_map(res.maps, G, G2)


@pytest.mark.parametrize("n,j", [(2, 1), (3, 1), (3, 2), (4, 3)])
def test_beilinson_single_term(n, j):
    b = beilinson_terms(single(n, j))
    assert b["names"] == {0: [(omega_name(j, n), 1)]}
    assert b["rank"] == comb(n, j)


def test_beilinson_null_correlation():
    b = beilinson_terms(build_example("null_correlation", n=3, i=1).G)
    assert b["names"] == {-1: [("O(-1)", 1)], 0: [("Omega^1(1)", 1)]}
    assert b["rank"] == 2
