from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from htbgg.exactla import GF, QQ, Mat
from htbgg.exterior import ExtElement, dual_iso
from htbgg.gallery import (GalleryError, MonadSpec, _columns, build_example, check_epi, check_epi_dual,
                           check_mono, composition_zero, koszul, monad_report, projective_points,
                           standard_gallery, tango_elements, tango_vetter)

F7 = GF(7)


@pytest.mark.parametrize("ex", standard_gallery(), ids=lambda e: e.name)
def test_gallery_members_are_ht(ex):
    assert ex.G.is_ht() and ex.G.verify_complex()["ok"]


@pytest.mark.parametrize("n,p", [(1, 2), (2, 3), (3, 5), (4, 7)])
def test_projective_point_count(n, p):
    pts = list(projective_points(n, p))
    assert len(pts) == (p ** (n + 1) - 1) // (p - 1)
    assert len(set(pts)) == len(pts)
    assert all(next(x for x in v if x) == 1 for v in pts)


@pytest.mark.parametrize("name,params", [
    ("null_correlation", {"n": 4}),
    ("null_correlation", {"n": 3, "i": 2}),
    ("koszul", {"n": 3, "j": 3}),
    ("eilenberg_maclane", {"n": 3, "j": 1, "module": "bogus"}),
    ("tango_vetter", {"n": 2}),
    ("horrocks_p5", {"field": GF(2)}),
    ("no_such_thing", {}),
])
def test_bad_parameters(name, params):
    with pytest.raises(GalleryError):
        build_example(name, **params)


def test_monad_spec_rejects_other_positions():
    G = build_example("eilenberg_maclane", n=3, j=2, module="m2").G
    assert G.positions() == [0, 1]
    with pytest.raises(GalleryError):
        MonadSpec(G)


def test_empty_spaces_are_trivially_fine():
    spec = MonadSpec(koszul(3, 1, F7).G)
    assert check_mono(spec).ok and check_epi(spec).ok and check_epi_dual(spec).ok
    assert composition_zero(spec)


def test_tango_elements_count():
    for n in (3, 4, 5, 6):
        assert len(tango_elements(n)) == comb(n - 1, 2)
        ex = tango_vetter(n)
        assert ex.spec.H.cols == comb(n - 1, 2)


def test_tango_h_columns_are_dual_elements():
    ex = tango_vetter(4, F7)
    H = _columns([dual_iso(w) for w in ex.payload["w"]], 4, 3, F7)
    assert H == ex.spec.H


def test_tango_mono_exhaustive():
    v = check_mono(tango_vetter(4, F7).spec)
    assert v.ok and v.mode == "exhaustive" and v.points == 2801


def test_decomposable_h_fails_mono():
    ex = tango_vetter(4, F7)
    w = ExtElement.basis("V", 4, [1, 2], 1, F7)
    v = check_mono(MonadSpec(ex.G, H=_columns([dual_iso(w)], 4, 3, F7)))
    assert not v.ok and v.witness is not None
    assert v.to_json()["detail"] == "H meets the image"


def test_rank_deficient_k_fails_epi():
    G = koszul(3, 1, F7).G
    K = Mat.from_rows(F7, [[1, 0, 0, 0], [1, 0, 0, 0]])
    v = check_epi(MonadSpec(G, K=K))
    assert not v.ok and v.points == 1


def test_decomposable_q_fails_epi_dual():
    h = build_example("horrocks_p5", field=F7)
    lam = ExtElement.basis("V", 5, [0, 1, 2], 1, F7)
    Q = _columns([ExtElement("V*", 5, 3, dict(lam.coeffs), F7)], 5, 3, F7).T
    v = check_epi_dual(MonadSpec(h.G, H=h.spec.H, Q=Q))
    assert not v.ok and len(v.witness) == 6


def test_sampling_over_q_is_probable():
    h = build_example("horrocks_p5", field=QQ)
    v = check_epi_dual(h.spec, samples=10)
    assert v.ok and v.mode == "probable" and v.points == 10


@settings(max_examples=5)
@given(st.integers(0, 10 ** 6))
def test_sampled_mono_agrees_with_exhaustive(seed):
    spec = tango_vetter(4, F7).spec
    v = check_mono(spec, exhaustive=False, samples=20, seed=seed)
    assert v.ok and v.mode == "probable"


def test_horrocks_mumford_seed_report():
    rep = monad_report(build_example("horrocks_mumford_seed"))
    assert rep["z0_rank"] == 12 and rep["bundle_rank"] == 12 and "is_monad" not in rep


def test_null_correlation_report():
    rep = monad_report(build_example("null_correlation", n=3, i=1, field=F7))
    assert rep["bundle_rank"] == 2 and rep["is_monad"]
    assert rep["cohomology_rank"] == 2


def test_tango_report():
    rep = monad_report(build_example("tango_vetter", n=4, field=F7))
    assert rep["is_monad"] and rep["cohomology_rank"] == 3
