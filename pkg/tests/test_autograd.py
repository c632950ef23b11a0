"""
Tensor, cinta y operaciones diferenciables.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from vitfreeze.autograd import ops
from vitfreeze.autograd.gradcheck import OP_CASES, check_gradients, relative_error, run_cases
from vitfreeze.autograd.tensor import Tape, Tensor, backward, make_output, no_grad, recording, set_debug
from vitfreeze.utils.errors import ContractError, DimensionError


def grads_of(fn, *arrays):
    leaves = [Tensor(np.asarray(a, dtype=np.float64), requires_grad=True) for a in arrays]
    tape = Tape()
    with recording(tape):
        loss = fn(*leaves)
    grads = backward(tape, loss)
    return leaves, grads, tape


# ============================================
# MATMUL
# ============================================
def test_matmul_identity():
    a = Tensor(np.eye(2))
    b = Tensor([[1.0, 2.0], [3.0, 4.0]])
    assert_array_equal(ops.matmul(a, b).data, [[1, 2], [3, 4]])


def test_matmul_projector_selects_row():
    out = ops.matmul(Tensor([[1.0, 0.0], [0.0, 0.0]]), Tensor([[5.0, 6.0], [7.0, 8.0]]))
    assert_array_equal(out.data, [[5, 6], [0, 0]])


def test_matmul_shape_mismatch_names_both_shapes():
    with pytest.raises(DimensionError, match=r"\(3, 4\).*\(3, 2\)"):
        ops.matmul(Tensor(np.zeros((3, 4))), Tensor(np.zeros((3, 2))))


def test_matmul_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    err = check_gradients(ops.matmul, [rng.standard_normal((3, 4)), rng.standard_normal((4, 2))], rng=rng)
    assert err < 1e-6


# ============================================
# LAYER NORM / SOFTMAX / GELU
# ============================================
def test_layer_norm_constant_vector_is_zero():
    x = Tensor(np.full((1, 5), 3.0))
    out = ops.layer_norm(x, Tensor(np.ones(5)), Tensor(np.zeros(5)), eps=1e-6)
    assert_array_equal(out.data, np.zeros((1, 5)))


def test_layer_norm_already_normalized():
    out = ops.layer_norm(Tensor([[1.0, -1.0]]), Tensor(np.ones(2)), Tensor(np.zeros(2)), eps=1e-12)
    assert_allclose(out.data, [[1.0, -1.0]], atol=1e-9)


def test_layer_norm_rows_have_zero_mean():
    rng = np.random.default_rng(1)
    out = ops.layer_norm(Tensor(rng.standard_normal((6, 8)) * 5 + 2), Tensor(np.ones(8)), Tensor(np.zeros(8)))
    assert np.abs(out.data.mean(axis=-1)).max() < 1e-10


def test_layer_norm_gamma_mismatch():
    with pytest.raises(DimensionError):
        ops.layer_norm(Tensor(np.zeros((2, 8))), Tensor(np.ones(4)), Tensor(np.zeros(4)))


def test_softmax_uniform_and_saturated():
    assert_allclose(ops.softmax_last(Tensor([0.0, 0.0, 0.0])).data, [1 / 3] * 3, atol=1e-15)
    assert_allclose(ops.softmax_last(Tensor([1000.0, 0.0, 0.0])).data, [1.0, 0.0, 0.0], atol=1e-12)


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(3)
    out = ops.softmax_last(Tensor(rng.standard_normal((4, 6)) * 10))
    assert np.abs(out.data.sum(axis=-1) - 1.0).max() < 1e-12


@pytest.mark.parametrize("approximate", ["tanh", "none"])
def test_gelu_zero_and_asymptotes(approximate):
    out = ops.gelu(Tensor([0.0, 20.0, -20.0]), approximate=approximate).data
    assert out[0] == 0.0
    assert out[1] == pytest.approx(20.0, rel=1e-9)
    assert abs(out[2]) < 1e-9


def test_gelu_unknown_approximation():
    with pytest.raises(ValueError):
        ops.gelu(Tensor([1.0]), approximate="sigmoid")


# ============================================
# ESCALADO ESPACIAL
# ============================================
def test_avgpool_constant_map():
    out = ops.avgpool2x(Tensor(np.full((2, 4, 4), 1.5)))
    assert out.shape == (2, 2, 2)
    assert_array_equal(out.data, np.full((2, 2, 2), 1.5))


def test_avgpool_odd_dims():
    with pytest.raises(DimensionError):
        ops.avgpool2x(Tensor(np.zeros((1, 3, 4))))


def test_upsample_all_ones_kernel_copies_value():
    out = ops.upsample2x(Tensor([[[2.5]]]), Tensor(np.ones((1, 1, 2, 2))))
    assert out.shape == (1, 2, 2)
    assert_array_equal(out.data, np.full((1, 2, 2), 2.5))


def test_upsample_with_batch_and_bias_shape():
    x = Tensor(np.zeros((3, 2, 4, 4)))
    out = ops.upsample2x(x, Tensor(np.zeros((2, 5, 2, 2))), Tensor(np.arange(5.0)))
    assert out.shape == (3, 5, 8, 8)
    assert_array_equal(out.data[1, 4], np.full((8, 8), 4.0))


# ============================================
# BACKWARD
# ============================================
def test_sum_gives_all_ones():
    (x,), grads, _ = grads_of(lambda t: ops.sum(t), np.arange(6.0).reshape(2, 3))
    assert_array_equal(grads[x.node_id].data, np.ones((2, 3)))


def test_non_scalar_loss_is_rejected():
    x = Tensor(np.ones(3), requires_grad=True)
    tape = Tape()
    with recording(tape):
        y = ops.scale(x, 2.0)
    with pytest.raises(ContractError):
        backward(tape, y)


def test_frozen_boundary_above_leaf_blocks_gradient():
    (x,), grads, _ = grads_of(lambda t: ops.sum(ops.mul(ops.frozen_boundary(t), 3.0)), np.ones(4))
    assert x.node_id not in grads


def test_frozen_boundary_matches_truncated_subgraph():
    rng = np.random.default_rng(11)
    a0, w0 = rng.standard_normal((3, 4)), rng.standard_normal((4, 4))

    def full(a, w):
        h = ops.frozen_boundary(ops.gelu(ops.matmul(a, w)))
        return ops.sum(ops.mul(ops.matmul(h, w), h))

    (a, w), grads, _ = grads_of(full, a0, w0)
    assert a.node_id not in grads

    # mismo grafo con la parte congelada reemplazada por una constante
    with no_grad():
        h_const = ops.gelu(ops.matmul(Tensor(a0), Tensor(w0))).data
    (w2,), grads2, _ = grads_of(lambda w_: ops.sum(ops.mul(ops.matmul(Tensor(h_const), w_), Tensor(h_const))), w0)
    assert_allclose(grads[w.node_id].data, grads2[w2.node_id].data, atol=1e-12)


def test_no_grad_records_nothing():
    tape = Tape()
    x = Tensor(np.ones(3), requires_grad=True)
    with recording(tape):
        with no_grad():
            y = ops.scale(x, 2.0)
    assert len(tape) == 0
    assert not y.requires_grad


def test_tape_is_topological():
    rng = np.random.default_rng(0)
    _, _, tape = grads_of(
        lambda a, b: ops.sum(ops.softmax_last(ops.matmul(a, b))),
        rng.standard_normal((2, 3)),
        rng.standard_normal((3, 2)),
    )
    seen = set()
    for entry in tape.entries:
        for nid in entry.input_ids:
            assert nid in seen or not tape.produced(nid)
        seen.add(entry.output_id)


def test_broadcast_gradient_is_unbroadcast():
    (x, b), grads, _ = grads_of(lambda t, u: ops.sum(ops.add(t, u)), np.zeros((4, 3)), np.zeros(3))
    assert_array_equal(grads[b.node_id].data, np.full(3, 4.0))


def test_debug_mode_flags_non_finite():
    set_debug(True)
    try:
        with pytest.raises(ContractError):
            ops.mul(Tensor([np.inf]), Tensor([0.0]))
    finally:
        set_debug(False)


# ============================================
# VERIFICACIÓN DE GRADIENTES
# ============================================
def test_relative_error_is_relative_for_small_gradients():
    assert relative_error(np.float64(1e-3), np.float64(2e-3)) == pytest.approx(0.5)
    assert relative_error(np.float64(2e-4), np.float64(1e-4)) == pytest.approx(0.5)


def test_relative_error_floor_only_absorbs_noise():
    assert relative_error(np.float64(1e-9), np.float64(0.0)) == pytest.approx(1e-4)
    assert relative_error(np.float64(3e-8), np.float64(1e-8), floor=1e-2) == pytest.approx(2e-6)


def _scale_with_doubled_vjp(x):
    def vjp(g):
        return (g * 2e-4,)

    return make_output("bad_scale", x.data * 1e-4, (x,), vjp)


def test_wrong_vjp_on_small_gradients_is_rejected():
    err = check_gradients(_scale_with_doubled_vjp, [np.ones(3)])
    assert err > 0.4


def test_correct_vjp_on_small_gradients_passes():
    err = check_gradients(lambda x: ops.scale(x, 1e-4), [np.ones(3)])
    assert err < 1e-4


def test_every_op_case_passes_over_twenty_seeds():
    results = run_cases(OP_CASES, range(20), tolerance=1e-4, max_elements=16)
    failed = [(r.name, r.seed, r.max_rel_error) for r in results if not r.passed]
    assert not failed
    assert len(results) == 20 * len(OP_CASES)
