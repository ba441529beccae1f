from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rvinterp.qseries import (
    HalfQSeries,
    RationalPolynomial,
    j_inverse_at_cusp_one,
    j_inverse_series,
    j_series,
    jacobi_defect,
    lambda_series,
    series_invert,
    series_mul,
    series_pow,
    theta2_fourth,
    theta_series,
)

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def series(draw, min_len=1, max_len=8):
    cs = draw(st.lists(small, min_size=min_len, max_size=max_len))
    v = draw(st.integers(-3, 3))
    return HalfQSeries.from_coeffs(cs, valuation=v)


@st.composite
def unit_series(draw):
    lead = draw(small.filter(lambda c: c != 0))
    rest = draw(st.lists(small, min_size=2, max_size=7))
    v = draw(st.integers(-3, 3))
    return HalfQSeries.from_coeffs([lead] + rest, valuation=v)


def test_lambda_leading_coefficients():
    lam = lambda_series(8)
    assert [lam[k] for k in range(4)] == [0, 16, -128, 704]


def test_j_leading_coefficients():
    J = j_series(8)
    assert (J[1], J[2]) == (1, -24)
    assert J.valuation == 1


def test_j_inverse_principal_part():
    X = j_inverse_series(8)
    assert X.valuation == -1
    assert (X[-1], X[0], X[1]) == (1, 24, 276)


def test_j_inverse_other_cusp_starts_at_w2():
    s = j_inverse_at_cusp_one(8)
    assert s.valuation == 2
    assert s[2] == -4096


def test_jacobi_identity_to_order_64():
    d = jacobi_defect(64)
    assert d.is_zero()
    assert d.order == 64


def test_theta_coefficients():
    t3 = theta_series(3, 20)
    assert [t3[k] for k in range(10)] == [1, 2, 0, 0, 2, 0, 0, 0, 0, 2]
    t4 = theta_series(4, 20)
    assert [t4[k] for k in (0, 1, 4, 9, 16)] == [1, -2, 2, -2, 2]
    # Theta_2^4 = 16 w + 64 w^3 + 96 w^5 + ...
    t2 = theta2_fourth(8)
    assert [t2[k] for k in range(1, 6)] == [16, 0, 64, 0, 96]


def test_unknown_theta_index():
    with pytest.raises(ValueError):
        theta_series(5)


def test_coefficient_beyond_order_is_unknown():
    s = HalfQSeries.from_coeffs([1, 2, 3], order=3)
    with pytest.raises(IndexError):
        s[3]


def test_invert_zero_raises():
    with pytest.raises(ZeroDivisionError):
        series_invert(HalfQSeries.zero(4))


def test_json_roundtrip_exact():
    s = j_inverse_series(10)
    assert HalfQSeries.from_json(s.to_json()) == s


@given(series(), series())
def test_mul_commutes(a, b):
    assert series_mul(a, b) == series_mul(b, a)


@given(series(), series(), series())
@settings(max_examples=50)
def test_mul_associates(a, b, c):
    assert series_mul(series_mul(a, b), c) == series_mul(a, series_mul(b, c))


@given(series(), series())
def test_add_then_subtract(a, b):
    d = (a + b) - b
    # known only to the smaller order
    o = min(a.order, b.order)
    for k in range(min(a.valuation, o), o):
        assert d[k] == a[k]


@given(unit_series())
def test_inverse_times_series_is_one(a):
    p = series_mul(a, series_invert(a))
    assert p.valuation == 0
    assert p[0] == 1
    assert all(c == 0 for c in p.coeffs[1:])


@given(unit_series(), st.integers(0, 4))
@settings(max_examples=40)
def test_pow_matches_repeated_mul(a, k):
    expect = HalfQSeries.one(a.order - a.valuation)
    for _ in range(k):
        expect = series_mul(expect, a)
    got = series_pow(a, k)
    assert got.order == expect.order or k == 0
    for i in range(got.valuation, min(got.order, expect.order)):
        assert got[i] == expect[i]


@given(st.lists(small, min_size=1, max_size=6), small)
def test_polynomial_horner(cs, x):
    p = RationalPolynomial.from_coeffs(cs)
    assert p(x) == sum((c * x**k for k, c in enumerate(cs)), Fraction(0))
