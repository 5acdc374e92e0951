from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from htbgg.exactla import GF, QQ, Mat
from htbgg.exterior import (ExteriorError, ExtElement, basis_masks, contract, contract_basis,
                            divided_power, dual_iso, format_element, list_to_mask, pairing,
                            parse_element, shuffle_sign, sl2_check, symplectic_pair, wedge)


def e(n, *idx, c=1, F=QQ):
    return ExtElement.basis("V", n, list(idx), c, F)


def x(n, *idx, c=1, F=QQ):
    return ExtElement.basis("V*", n, list(idx), c, F)


@st.composite
def elements(draw, variance="V", n=3, degree=None, F=QQ):
    d = draw(st.integers(0, n + 1)) if degree is None else degree
    masks = basis_masks(n, d)
    coeffs = draw(st.lists(st.integers(-3, 3), min_size=len(masks), max_size=len(masks)))
    out = ExtElement.zero(variance, n, d, F)
    for m, c in zip(masks, coeffs):
        if c:
            out = out + ExtElement(variance, n, d, {m: F(c)}, F)
    return out


def test_basis_sorting_sign():
    assert e(3, 1, 0) == -e(3, 0, 1)
    assert e(3, 2, 0, 1) == e(3, 0, 1, 2)
    assert e(3, 1, 1).is_zero()


def test_shuffle_sign_values():
    assert shuffle_sign(0b01, 0b10) == 1
    assert shuffle_sign(0b10, 0b01) == -1
    assert shuffle_sign(0b100, 0b011) == 1
    assert shuffle_sign(0b110, 0b001) == 1
    assert shuffle_sign(0b010, 0b101) == -1


def test_contraction_convention():
    # X_S . e_T = sign(T, S minus T) X_{S minus T}
    assert contract(x(3, 0, 1, 2), e(3, 1)) == -x(3, 0, 2)
    assert contract(x(3, 0, 1, 2), e(3, 0)) == x(3, 1, 2)
    assert contract(x(3, 0, 1), e(3, 2)).is_zero()
    assert contract_basis(list_to_mask([0, 1, 2]), list_to_mask([1])) == (-1, list_to_mask([0, 2]))


def test_pairing_is_dual_basis():
    n = 3
    for d in range(n + 2):
        for S in basis_masks(n, d):
            for T in basis_masks(n, d):
                eta = ExtElement("V*", n, d, {S: 1}, QQ)
                om = ExtElement("V", n, d, {T: 1}, QQ)
                assert pairing(eta, om) == (1 if S == T else 0)


def test_dual_iso_is_bijective():
    n = 4
    for p in range(n + 2):
        imgs = [dual_iso(ExtElement("V", n, p, {T: 1}, QQ)) for T in basis_masks(n, p)]
        assert all(y.degree == n + 1 - p for y in imgs)
        masks = basis_masks(n, n + 1 - p)
        M = Mat.from_columns(QQ, [[y.coeffs.get(m, 0) for m in masks] for y in imgs], len(masks))
        assert M.rank() == comb(n + 1, p)


def test_divided_power_times_factorial():
    alpha, _ = symplectic_pair(3, QQ)
    power = ExtElement.one("V", 5, QQ)
    for i in range(1, 4):
        power = wedge(power, alpha)
        assert divided_power(alpha, i).scale(factorial(i)) == power
    assert divided_power(alpha, 4).is_zero()


def test_divided_power_in_char_two():
    # the divided square of alpha has coefficient 1 even where alpha^2 vanishes
    alpha, _ = symplectic_pair(2, GF(2))
    assert wedge(alpha, alpha).is_zero()
    assert divided_power(alpha, 2) == e(3, 0, 1, 2, 3, F=GF(2))


def test_parse_grammar():
    n = 3
    assert parse_element("e[0,2]+e[1,3]", n) == e(n, 0, 2) + e(n, 1, 3)
    assert parse_element("-2*x[1]", n) == x(n, 1, c=-2)
    assert parse_element("3/2*e[]", n) == ExtElement.one("V", n).scale(Fraction(3, 2))
    assert parse_element("0", n, QQ, "V", 2).is_zero()
    with pytest.raises(ExteriorError):
        parse_element("e[0]+e[1,2]", n)
    with pytest.raises(ExteriorError):
        parse_element("e[0,7]", n)
    with pytest.raises(ExteriorError):
        parse_element("e[0] e[1]", n)
    with pytest.raises(ExteriorError):
        parse_element("e[0]", n, degree=2)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("F", [QQ, GF(7)])
def test_sl2_relations(m, F):
    rep = sl2_check(m, F)
    assert rep["ok"], rep["failures"]
    assert rep["n"] == 2 * m - 1


@given(elements(), elements(), elements())
def test_wedge_associative(a, b, c):
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


@given(elements(), elements())
def test_graded_commutative(a, b):
    assert wedge(a, b) == wedge(b, a).scale((-1) ** (a.degree * b.degree))


@given(elements("V*"), elements(), elements())
def test_contraction_is_right_action(eta, w1, w2):
    assert contract(contract(eta, w1), w2) == contract(eta, wedge(w1, w2))


@given(elements("V*"), elements(degree=1))
def test_contraction_squares_to_zero(eta, v):
    assert contract(contract(eta, v), v).is_zero()


@given(elements("V*"), elements(), elements(), st.integers(-3, 3))
def test_contraction_bilinear(eta, w1, w2, c):
    if w1.degree != w2.degree:
        return
    assert contract(eta, w1 + w2.scale(c)) == contract(eta, w1) + contract(eta, w2).scale(c)


@given(elements(), elements(degree=1))
def test_dual_iso_intertwines_wedge_and_contraction(om, v):
    # dual_iso turns multiplication by v into contraction by v up to a sign
    lhs = dual_iso(wedge(om, v))
    rhs = contract(dual_iso(om), v)
    assert lhs == rhs or lhs == -rhs


@given(elements("V*", F=GF(7)).filter(lambda z: z.degree >= 0))
def test_format_parse_roundtrip_gf(z):
    txt = format_element(z)
    assert parse_element(txt, 3, GF(7), "V*", z.degree) == z


@given(elements())
def test_format_parse_roundtrip_q(z):
    assert parse_element(format_element(z), 3, QQ, "V", z.degree) == z
