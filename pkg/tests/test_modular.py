import cmath

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from rvinterp.modular import (
    ReductionError,
    eval_J,
    eval_lambda,
    modular_pieces,
    modular_pieces_arb,
    reduce_theta_group,
    theta_triple,
    theta_triple_arb,
)

upper = st.builds(
    complex,
    st.floats(-3, 3, allow_nan=False),
    st.floats(0.05, 3, allow_nan=False),
)


def mp_theta(z):
    """Theta_2, Theta_3, Theta_4 from mpmath's nome form (independent oracle)."""
    mpmath.mp.dps = 30
    q = mpmath.exp(1j * mpmath.pi * z)
    t2, t3, t4 = (mpmath.jtheta(k, 0, q) for k in (2, 3, 4))
    # mpmath takes the principal q^(1/4); we want exp(i pi z / 4)
    t2 = t2 * mpmath.exp(1j * mpmath.pi * z / 4) / mpmath.power(q, 0.25)
    return [complex(t2), complex(t3), complex(t4)]


@pytest.mark.parametrize("z", [0.3 + 0.7j, -0.45 + 0.3j, 1.7 + 0.2j, 0.01 + 1.5j, -2.2 + 0.9j])
def test_theta_matches_mpmath(z):
    got = theta_triple(np.array([z]))[:, 0]
    want = mp_theta(z)
    assert np.allclose(got, want, rtol=1e-12, atol=0)


def test_arb_backend_matches_double():
    z = 0.37 + 0.21j
    a = [complex(float(v.real.mid()), float(v.imag.mid())) for v in theta_triple_arb(z, 128)]
    assert np.allclose(a, theta_triple(np.array([z]))[:, 0], rtol=1e-12)
    pc = modular_pieces_arb(z, 128)
    assert abs(complex(float(pc["J"].real.mid()), float(pc["J"].imag.mid())) - eval_J(z)) < 1e-12 * abs(eval_J(z))


@given(upper)
def test_theta3_period_two(z):
    a = theta_triple(np.array([z, z + 2]))[1]
    assert abs(a[0] - a[1]) <= 1e-9 * max(1, abs(a[0]))


@given(upper)
def test_theta3_inversion(z):
    assume(abs(z) > 0.2)
    t = theta_triple(np.array([z, -1 / z]))[1]
    assert abs(cmath.sqrt(-1j * z) ** -1 * t[1] - t[0]) <= 1e-8 * max(1, abs(t[0]))


@given(upper)
@settings(max_examples=60)
def test_J_invariant_under_theta_group(z):
    assume(abs(z) > 0.2)
    J = eval_J(np.array([z, z + 2, -1 / z]))
    scale = max(1.0, abs(J[0]))
    assert abs(J[1] - J[0]) <= 1e-8 * scale
    assert abs(J[2] - J[0]) <= 1e-8 * scale


@given(upper)
def test_jacobi_identity_numerically(z):
    t2, t3, t4 = theta_triple(np.array([z]))[:, 0]
    assert abs(t3**4 - t2**4 - t4**4) <= 1e-9 * max(1, abs(t3) ** 4)


@given(upper)
def test_reduction_lands_in_fundamental_domain(z):
    w = reduce_theta_group(z)
    p = w.point
    assert abs(p.real) <= 0.5 + 1e-12
    assert abs(p) >= 1 - 1e-12
    assert abs(w.apply(z) - p) < 1e-9 * max(1, abs(p))


def test_lambda_cusp_asymptotic():
    # lambda ~ 16 w as Im z grows
    z = 0.2 + 4j
    w = cmath.exp(1j * cmath.pi * z)
    assert abs(eval_lambda(z) / (16 * w) - 1) < 1e-4


def test_pieces_consistent():
    z = np.array([0.1 + 0.9j, -0.4 + 0.4j])
    pc = modular_pieces(z)
    assert np.allclose(pc["J"] * pc["Jinv"], 1)
    assert np.allclose(pc["one_minus_2lambda"], 1 - 2 * pc["lambda"])


def test_lower_half_plane_rejected():
    with pytest.raises(ValueError):
        reduce_theta_group(0.3 - 0.1j)


def test_reduction_word_limit():
    with pytest.raises(ReductionError) as err:
        reduce_theta_group(0.123456 + 1e-9j, max_len=3)
    assert err.value.best_point.imag > 0
