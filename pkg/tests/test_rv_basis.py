import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rvinterp.rv_basis import (
    BasisTable,
    PrecisionError,
    basis_values,
    basis_values_s,
    build_gn,
    eval_bn,
    eval_bn_laplace,
    eval_gn,
    eval_gn_generating,
    generating_coefficients,
    get_evaluator,
    is_square,
    tabulate,
)


def test_known_polynomials():
    assert build_gn(0, 1).poly.coeffs == (1,)
    assert build_gn(1, 1).poly.coeffs == (-30, 1)
    assert build_gn(1, -1).poly.coeffs == (0, 1)
    assert build_gn(2, -1).poly.coeffs == (0, -22, 1)


def test_minus_family_starts_at_one():
    assert build_gn(0, -1).series.is_zero()


@given(st.integers(0, 12), st.sampled_from([1, -1]))
@settings(max_examples=30, deadline=None)
def test_principal_parts(n, sign):
    if sign < 0 and n == 0:
        return
    f = build_gn(n, sign, order=4)
    pp = f.principal_part
    want = {-n: 1}
    if sign < 0 and is_square(n):
        want[0] = -2
    assert pp == want
    assert f.poly.monic
    assert all(c.denominator == 1 for c in f.series.coeffs)


@pytest.mark.parametrize("n", range(0, 7))
@pytest.mark.parametrize("sign", [1, -1])
def test_generating_function_coefficients(n, sign):
    if sign < 0 and n == 0:
        return
    assert generating_coefficients(n, sign) == build_gn(n, sign, order=2).poly


def test_cusp_asymptotic():
    z = 0.13 + 5.0j
    w = cmath.exp(1j * math.pi * z)
    for n in (1, 3, 5):
        g = eval_gn(n, 1, z, "extended")
        assert abs(g * w**n - 1) < 1e-5


@pytest.mark.parametrize("sign", [1, -1])
def test_weight_three_halves(sign):
    z = 0.31 + 0.83j
    for n in (1, 2, 4):
        g = eval_gn(n, sign, np.array([z, z + 2, -1 / z]), "extended")
        assert abs(g[1] - g[0]) < 1e-9 * abs(g[0])
        factor = sign * (-1j * z) ** 1.5
        assert abs(g[2] - factor * g[0]) < 1e-9 * abs(g[2])


def test_double_and_extended_agree():
    z = np.array([0.2 + 0.9j, -0.4 + 1.3j])
    for n in (1, 5, 9):
        a = eval_gn(n, -1, z, "extended")
        b = eval_gn(n, -1, z, "double")
        assert np.allclose(a, b, rtol=1e-9)


def test_generating_kernel_variants():
    z = np.array([0.1 + 0.8j, -0.25 + 1.05j])
    g = eval_gn(3, -1, z, "extended")
    assert np.allclose(eval_gn_generating(3, -1, z, "corrected"), g, rtol=1e-7)
    assert not np.allclose(eval_gn_generating(3, -1, z, "printed"), g, rtol=1e-3)


def test_generating_divergence_detected():
    with pytest.raises(ValueError):
        eval_gn_generating(2, 1, np.array([0.1 + 3.0j]), T=1.0)


def test_precision_guard():
    with pytest.raises(PrecisionError):
        basis_values(30, [0.5])
    with pytest.raises(PrecisionError):
        eval_gn(25, 1, 0.5j)


def test_values_at_origin_and_roots():
    a, ah = basis_values_s(6, np.arange(7.0))
    assert a[0, 0] == pytest.approx(0.5, abs=1e-12)
    for n in range(1, 7):
        sq = 1.0 if is_square(n) else 0.0
        assert a[n, 0] == pytest.approx(-sq, abs=1e-12)
        assert ah[n, 0] == pytest.approx(sq, abs=1e-12)
    assert np.allclose(a[1:, 1:], np.eye(6), atol=1e-12)
    assert np.allclose(ah[1:, 1:], 0, atol=1e-12)


def test_real_and_complex_paths_agree():
    ev = get_evaluator(4)
    s = np.array([0.3, 2.7, 5.5, 11.2])
    bp, bm = ev.values(s)
    cp, cm = ev.values(s + 0j * s + 1e-300j)
    assert np.allclose(bp, cp.real, rtol=1e-12, atol=1e-14)
    assert np.allclose(bm, cm.real, rtol=1e-12, atol=1e-14)


def test_evaluator_error_bounds():
    ev = get_evaluator(8)
    _, _, rad = ev.values(np.linspace(0, 30, 7), return_radius=True)
    assert rad < 1e-20
    assert ev.tail_truncation() < 1e-30


def test_contour_and_laplace_agree():
    x = np.array([0.3, 1.1, 1.9, 2.6])
    for n, sign in ((0, 1), (2, 1), (3, -1)):
        c = eval_bn(n, sign, x)
        lap = eval_bn_laplace(n, sign, x)
        assert np.allclose(c, lap, rtol=1e-10, atol=1e-12)


def test_contour_error_estimate():
    v, err = eval_bn(1, 1, np.array([0.7]), error_estimate=True)
    assert err[0] < 1e-10


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("sign", [1, -1])
def test_fourier_eigenfunction(n, sign):
    # trapezoid sum of 2 int_0^L b(x) cos(2 pi x xi) dx for an even integrand
    h, L = 0.01, 7.0
    x = np.arange(0.0, L + h / 2, h)
    bp, bm = get_evaluator(4).values(x * x)
    b = (bp if sign > 0 else bm)[n].real
    w = np.full(x.size, h)
    w[0] = w[-1] = h / 2
    xi = np.array([0.0, 0.45, 0.9, 1.3, 1.75])
    ft = 2 * (np.cos(2 * np.pi * np.outer(xi, x)) * (b * w)).sum(axis=1)
    want = sign * (bp if sign > 0 else bm)[n].real[np.searchsorted(x, xi - 1e-12)]
    assert np.max(np.abs(ft - want)) < 1e-5


def test_table_roundtrip(tmp_path):
    pts = np.array([0.0, 0.5, 1.0, 1.7])
    t = tabulate(4, pts, cache_dir=tmp_path)
    path = next(tmp_path.glob("basis-*.bin"))
    t2 = BasisTable.load(path)
    assert np.array_equal(t.values, t2.values)
    assert np.array_equal(t.points, t2.points)
    assert t2.key() == t.key()


def test_corrupt_table_detected_and_rebuilt(tmp_path):
    pts = np.array([0.25, 0.75])
    t = tabulate(4, pts, cache_dir=tmp_path)
    path = next(tmp_path.glob("basis-*.bin"))
    raw = bytearray(path.read_bytes())
    raw[-3] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        BasisTable.load(path)
    t2 = tabulate(4, pts, cache_dir=tmp_path)
    assert np.array_equal(t2.values, t.values)
    BasisTable.load(path)
