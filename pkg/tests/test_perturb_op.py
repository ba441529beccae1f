import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rvinterp.nodes import NodePlan, Perturbation
from rvinterp.perturb_op import (
    NeumannError,
    WeightScheme,
    build_truncation,
    coefficient_decay,
    eval_perturbed_basis,
    hs_defect,
    invert_direct,
    invert_neumann,
    node_residual,
    perturbed_coeffs,
    sample_basis,
    slot_weights,
    unweighted_inverse,
)
from rvinterp.rv_basis import tabulate

N = 16


@pytest.fixture(scope="module")
def standard():
    plan = NodePlan(Perturbation.power(0.01, 1.5), N)
    op = build_truncation(plan, WeightScheme.parse("s=5"))
    return plan, op


def test_zero_perturbation_gives_identity():
    plan = NodePlan(Perturbation.zero(), N)
    op = build_truncation(plan, WeightScheme.parse("s=5"))
    assert np.array_equal(op.matrix, np.eye(2 * N + 1))
    assert hs_defect(op) == 0
    inv = invert_neumann(op)
    assert np.array_equal(inv.inverse, np.eye(2 * N + 1))


def test_defect_small_for_standard_plan(standard):
    _, op = standard
    assert 0 < hs_defect(op) < 0.1
    assert op.tail_estimate() < hs_defect(op)


def test_neumann_matches_direct(standard):
    _, op = standard
    a = invert_neumann(op)
    b = invert_direct(op)
    assert np.max(np.abs(a.inverse - b.inverse)) < 1e-12
    assert a.terms > 1
    assert b.condition < 2


def test_perturbed_basis_interpolates(standard):
    plan, op = standard
    c = perturbed_coeffs(op, invert_neumann(op).inverse)
    assert node_residual(c, plan, 12) < 1e-12
    h, g = eval_perturbed_basis(c, plan.x[1:4])
    assert np.allclose(h[1:4], np.eye(3), atol=1e-12)


def test_coefficients_decay(standard):
    _, op = standard
    c = perturbed_coeffs(op, invert_neumann(op).inverse)
    assert coefficient_decay(c, 2) > 0


def test_weights_conjugate(standard):
    _, op = standard
    w = slot_weights(WeightScheme.parse("s=5"), N)
    assert np.allclose(op.raw * w[:, None] / w[None, :], op.matrix)


def test_neumann_refuses_large_defect():
    plan = NodePlan(Perturbation.power(0.3, 0.5), N)
    op = build_truncation(plan, WeightScheme.parse("s=5"))
    assert hs_defect(op) >= 1
    with pytest.raises(NeumannError):
        invert_neumann(op)
    inv = invert_direct(op)
    assert np.allclose(inv.inverse @ op.matrix, np.eye(2 * N + 1), atol=1e-9)


def test_singular_matrix_reported():
    with pytest.raises(np.linalg.LinAlgError, match="singular"):
        invert_direct(np.ones((3, 3)))


def test_table_and_direct_samples_agree(tmp_path):
    plan = NodePlan(Perturbation.power(0.02, 1.5), 8)
    table = tabulate(8, np.concatenate([plan.x, plan.y]), cache_dir=tmp_path)
    a = sample_basis(plan, table)
    b = sample_basis(plan)
    assert np.allclose(a.a_x, b.a_x, atol=1e-14)
    assert np.allclose(a.ah_y, b.ah_y, atol=1e-14)


def test_table_missing_node(tmp_path):
    plan = NodePlan(Perturbation.power(0.02, 1.5), 4)
    table = tabulate(4, plan.x[:-1], cache_dir=tmp_path)
    with pytest.raises(KeyError, match="lacks node"):
        sample_basis(plan, table)


@given(st.floats(0.0, 6.0), st.integers(0, 30))
def test_polynomial_weights_nondecreasing(s, n):
    w = WeightScheme("polynomial", s)
    assert w(n + 1) >= w(n)


@given(st.floats(1e-4, 0.02))
@settings(max_examples=8, deadline=None)
def test_defect_grows_with_amplitude(c):
    small = build_truncation(NodePlan(Perturbation.power(c, 1.5), 8), WeightScheme.parse("s=2"))
    large = build_truncation(NodePlan(Perturbation.power(2 * c, 1.5), 8), WeightScheme.parse("s=2"))
    assert hs_defect(small) < hs_defect(large)


def test_weight_parse():
    assert WeightScheme.parse("exp=0.3") == WeightScheme("exponential", 0.3)
    with pytest.raises(ValueError):
        WeightScheme.parse("t=1")
    with pytest.raises(ValueError):
        WeightScheme("polynomial", -1)


def test_unweighted_inverse_inverts_raw(standard):
    _, op = standard
    T = unweighted_inverse(op, invert_direct(op).inverse)
    assert np.allclose(T @ op.raw, np.eye(2 * N + 1), atol=1e-10)
