import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rvinterp.interpolate import (
    Gaussian,
    HermiteGaussian,
    ZeroFunction,
    derivative,
    function_from_spec,
    gelfand_shilov_norm,
    reconstruct,
    rv_synthesis,
    sample,
    seminorm,
    seminorm_of,
    synthesize,
)
from rvinterp.nodes import NodePlan, Perturbation
from rvinterp.perturb_op import WeightScheme, build_truncation, invert_neumann, synthesis_matrix, unweighted_inverse


def _ft(f, xi, L=8.0, h=1e-3):
    x = np.arange(-L, L, h)
    return np.array([(f(x) * np.exp(-2j * np.pi * x * v)).sum() * h for v in xi])


@given(st.floats(0.3, 3.0))
@settings(max_examples=10, deadline=None)
def test_gaussian_transform(a):
    g = Gaussian(a)
    xi = np.array([0.0, 0.4, 1.1])
    assert np.allclose(_ft(g, xi).real, g.fourier(xi), atol=1e-9)


@pytest.mark.parametrize("coeffs", [(1.0,), (0.0, 1.0), (0.5, -0.2, 0.1)])
def test_hermite_transform(coeffs):
    f = HermiteGaussian(coeffs)
    xi = np.array([0.0, 0.3, 0.8])
    assert np.allclose(_ft(f, xi).real, f.fourier(xi), atol=1e-8)


def test_function_spec():
    assert function_from_spec("gaussian:2") == Gaussian(2.0)
    assert isinstance(function_from_spec("zero"), ZeroFunction)
    with pytest.raises(ValueError):
        function_from_spec("sinc")
    with pytest.raises(ValueError):
        Gaussian(-1.0)


def test_sample_layout():
    plan = NodePlan(Perturbation.zero(), 3)
    s = sample(Gaussian(), plan)
    assert s.size == 7
    assert s[0] == 2.0
    assert np.allclose(s[1:4], np.exp(-np.pi * np.arange(1, 4)))


@given(st.integers(1, 4), st.floats(0.05, 0.2))
@settings(max_examples=20, deadline=None)
def test_derivative_of_polynomial_times_gaussian(beta, h):
    x = np.arange(-3, 3 + h / 2, h)
    f = np.exp(-x * x)
    d, g = derivative(f, x, beta)
    exact = {1: -2 * g, 2: 4 * g**2 - 2, 3: -8 * g**3 + 12 * g, 4: 16 * g**4 - 48 * g**2 + 12}[beta]
    exact = exact * np.exp(-g * g)
    assert np.max(np.abs(d - exact)) < 40 * h**4 * 2**beta


def test_derivative_needs_uniform_grid():
    with pytest.raises(ValueError):
        derivative(np.ones(20), np.r_[0.0, np.cumsum(np.linspace(0.1, 0.2, 19))], 1)


def test_seminorm_known_value():
    # sup |x e^{-pi x^2}| = e^{-1/2} / sqrt(2 pi)
    assert seminorm_of(Gaussian(), 1, 0) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-6)


def test_gs_norm_flags_divergence():
    x = np.linspace(-5, 5, 1001)
    ok = gelfand_shilov_norm(np.exp(-np.pi * x * x), x, 1.0, np.exp(-np.pi * x * x))
    assert not ok.divergent
    bad = gelfand_shilov_norm(np.exp(-0.5 * np.abs(x)), x, 1.0)
    assert bad.divergent


def test_unperturbed_reconstruction_of_gaussian():
    grid = np.linspace(-3, 3, 121)
    plan = NodePlan(Perturbation.zero(), 16)
    rep = reconstruct(sample(Gaussian(), plan), grid, truth=Gaussian(), seminorms=((0, 1),))
    assert rep.sup_error < 1e-13
    assert rep.seminorm_errors[(0, 1)] < 1e-10


def test_zero_path_matches_direct_synthesis():
    grid = np.linspace(-2, 2, 41)
    Phi = synthesis_matrix(12, grid)
    plan = NodePlan(Perturbation.zero(), 12)
    op = build_truncation(plan, WeightScheme.parse("s=5"))
    inv = unweighted_inverse(op, invert_neumann(op).inverse)
    rep = reconstruct(sample(Gaussian(2.0), plan), grid, inv, Phi=Phi)
    assert np.array_equal(rep.values, rv_synthesis(Gaussian(2.0), 12, grid, Phi=Phi))


def test_perturbed_reconstruction_of_hermite():
    f = HermiteGaussian((1.0, 0.3))
    grid = np.linspace(-3, 3, 61)
    plan = NodePlan(Perturbation.power(0.01, 1.5), 24)
    op = build_truncation(plan, WeightScheme.parse("s=5"))
    inv = unweighted_inverse(op, invert_neumann(op).inverse)
    rep = reconstruct(sample(f, plan), grid, inv, truth=f, op=op, precision="extended")
    assert rep.sup_error < 1e-10
    assert rep.node_residual < 1e-12


def test_reconstruct_shape_checks():
    with pytest.raises(ValueError):
        reconstruct(np.ones(4), [0.0])
    with pytest.raises(ValueError):
        reconstruct(np.ones(5), [0.0], inverse=np.eye(3))
    with pytest.raises(ValueError):
        synthesize(np.ones(5), [0.0], Phi=np.ones((3, 1)))


def test_report_rows():
    grid = np.array([0.0, 0.5])
    rep = reconstruct(sample(ZeroFunction(), NodePlan(Perturbation.zero(), 2)), grid, truth=ZeroFunction())
    rows = list(rep.rows())
    assert rows == [(0.0, 0.0, 0.0, 0.0), (0.5, 0.0, 0.0, 0.0)]
