"""
Máscaras, HOG y pérdida LocalMIM.
"""

import math
from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from vitfreeze.autograd.tensor import Tape, Tensor, backward, recording
from vitfreeze.objective.hog import HOG_EPS, SupervisionTarget, build_targets, hog_features
from vitfreeze.objective.loss import local_mim_loss
from vitfreeze.objective.masking import MaskBatch, masked_count, sample_mask, scale_mask
from vitfreeze.utils.errors import ConfigError, DimensionError


# ============================================
# MÁSCARAS
# ============================================
def test_vit_b_masks_147_of_196():
    plan = sample_mask(0, 196, 0.75)
    assert len(plan.masked_indices) == 147
    assert len(plan.visible_indices) == 49
    assert_array_equal(np.union1d(plan.masked_indices, plan.visible_indices), np.arange(196))


def test_masked_count_rounds_half_up():
    assert masked_count(10, 0.25) == 3
    assert masked_count(64, 0.75) == 48


def test_same_seed_same_plan():
    a = sample_mask(123, 64, 0.75, (16, 8, 4))
    b = sample_mask(123, 64, 0.75, (16, 8, 4))
    assert_array_equal(a.masked_indices, b.masked_indices)
    for s in a.scale_masks:
        assert_array_equal(a.scale_masks[s], b.scale_masks[s])


def test_each_patch_masked_with_frequency_r():
    counts = np.zeros(64)
    for seed in range(10_000):
        counts += sample_mask(seed, 64, 0.75).patch_mask()
    freq = counts / 10_000
    assert np.abs(freq - 0.75).max() < 0.02


@pytest.mark.parametrize("ratio", [0.0, 1.0, -0.1, 1.5])
def test_ratio_outside_open_interval(ratio):
    with pytest.raises(ConfigError):
        sample_mask(0, 64, ratio)


def test_scale_masks_keep_the_ratio():
    plan = sample_mask(5, 64, 0.75, (16, 8, 4, 2))
    for s, m in plan.scale_masks.items():
        assert m.shape == (s, s)
        assert m.mean() == pytest.approx(0.75)
    # más fino que la rejilla: cada parche cubre 2x2 posiciones con su valor 0/1
    assert set(np.unique(plan.scale_masks[16])) <= {0.0, 1.0}


def test_scale_mask_coarse_is_fraction():
    grid = np.array([[1, 0], [1, 1]], dtype=bool)
    assert_array_equal(scale_mask(grid, 1), [[0.75]])


def test_mask_batch_stacks_plans():
    plans = [sample_mask(s, 16, 0.5, (4, 2)) for s in range(3)]
    batch = MaskBatch.from_plans(plans)
    assert batch.visible.shape == (3, 8)
    assert batch.scale_masks[2].shape == (3, 2, 2)
    assert batch.num_patches == 16


# ============================================
# HOG
# ============================================
def brute_force_hog(image: np.ndarray, cell: int, bins: int) -> np.ndarray:
    """Referencia pixel por pixel con la regla del canal de mayor magnitud."""
    c, h, w = image.shape
    hist = np.zeros((bins, h // cell, w // cell))
    for i in range(h):
        for j in range(w):
            best = (-1.0, 0.0, 0.0)
            for ch in range(c):
                gx = image[ch, i, j + 1] - image[ch, i, j - 1] if 0 < j < w - 1 else 0.0
                gy = image[ch, i + 1, j] - image[ch, i - 1, j] if 0 < i < h - 1 else 0.0
                mag = math.hypot(gx, gy)
                if mag > best[0]:
                    best = (mag, gx, gy)
            mag, gx, gy = best
            theta = math.atan2(gy, gx) % math.pi
            pos = theta / (math.pi / bins)
            lo = int(math.floor(pos))
            frac = pos - lo
            hist[lo % bins, i // cell, j // cell] += mag * (1.0 - frac)
            hist[(lo + 1) % bins, i // cell, j // cell] += mag * frac
    norm = np.sqrt((hist**2).sum(axis=0, keepdims=True) + HOG_EPS**2)
    return hist / norm


def test_constant_image_gives_zero_histograms():
    out = hog_features(np.full((3, 16, 16), 0.4), cell_size=4)
    assert_array_equal(out, np.zeros((9, 4, 4)))


def test_vertical_edge_goes_to_bin_zero():
    img = np.zeros((3, 8, 8))
    img[:, :, 4:] = 1.0
    out = hog_features(img, cell_size=8, num_bins=9)[:, 0, 0]
    assert out[0] == pytest.approx(1.0, abs=1e-9)
    assert_array_equal(out[1:], np.zeros(8))


def test_diagonal_edge_rotation_moves_dominant_bin():
    img = np.triu(np.ones((8, 8)), k=1)[None].repeat(3, axis=0)
    rotated = np.rot90(img, axes=(1, 2)).copy()
    a = hog_features(img, cell_size=8)[:, 0, 0]
    b = hog_features(rotated, cell_size=8)[:, 0, 0]
    assert int(np.argmax(a)) == 7
    assert int(np.argmax(b)) == 2


@pytest.mark.parametrize("seed", range(3))
def test_matches_brute_force_reference(seed):
    img = np.random.default_rng(seed).random((3, 8, 8))
    for cell in (2, 4, 8):
        assert_allclose(hog_features(img, cell_size=cell), brute_force_hog(img, cell, 9), atol=1e-9)


def test_histograms_non_negative_and_unit_bounded():
    img = np.random.default_rng(1).random((3, 32, 32))
    out = hog_features(img, cell_size=4)
    assert out.min() >= 0.0
    assert np.sqrt((out**2).sum(axis=0)).max() <= 1.0 + 1e-6


def test_raw_energy_is_conserved_across_scales():
    img = np.random.default_rng(2).random((3, 32, 32))
    fine = hog_features(img, cell_size=2, normalize=False).sum()
    coarse = hog_features(img, cell_size=4, normalize=False).sum()
    assert fine == pytest.approx(coarse, abs=1e-9)


def test_shift_by_one_cell_shifts_the_map():
    rng = np.random.default_rng(3)
    img = np.zeros((3, 32, 32))
    img[:, 4:12, 4:12] = rng.random((3, 8, 8))
    shifted = np.zeros_like(img)
    shifted[:, 8:16, 4:12] = img[:, 4:12, 4:12]
    a = hog_features(img, cell_size=4)
    b = hog_features(shifted, cell_size=4)
    assert_allclose(b[:, 1:, :], a[:, :-1, :], atol=1e-12)


def test_indivisible_cell():
    with pytest.raises(DimensionError):
        hog_features(np.zeros((3, 10, 10)), cell_size=4)


def test_build_targets_vit_b_cell_sizes():
    targets = build_targets(np.zeros((3, 224, 224)), [56, 28, 14, 7])
    assert {s: m.shape for s, m in targets.maps.items()} == {
        56: (9, 56, 56),
        28: (9, 28, 28),
        14: (9, 14, 14),
        7: (9, 7, 7),
    }


def test_build_targets_matches_single_scale_hog():
    img = np.random.default_rng(4).random((2, 3, 64, 64))
    targets = build_targets(img, [8])
    assert targets.maps[8].shape == (2, 9, 8, 8)
    assert_allclose(targets.maps[8][1], hog_features(img[1], cell_size=8), atol=1e-12)


def test_build_targets_invalid_scale():
    with pytest.raises(ConfigError):
        build_targets(np.zeros((3, 64, 64)), [12])


# ============================================
# PÉRDIDA
# ============================================
def test_perfect_prediction_gives_zero():
    y = np.random.default_rng(0).random((2, 9, 4, 4))
    masks = SimpleNamespace(scale_masks={4: np.ones((2, 4, 4))})
    result = local_mim_loss({1: Tensor(y.copy())}, SupervisionTarget({4: y}), masks)
    assert result.total.item() == 0.0
    assert not result.complete


def test_all_zero_mask_gives_zero():
    rng = np.random.default_rng(1)
    masks = SimpleNamespace(scale_masks={4: np.zeros((1, 4, 4)), 2: np.zeros((1, 2, 2))})
    preds = {1: Tensor(rng.random((1, 9, 4, 4))), 2: Tensor(rng.random((1, 9, 2, 2)))}
    targets = SupervisionTarget({4: rng.random((1, 9, 4, 4)), 2: rng.random((1, 9, 2, 2))})
    assert local_mim_loss(preds, targets, masks).total.item() == 0.0


def test_two_scales_match_direct_formula():
    rng = np.random.default_rng(2)
    pred2, y2 = rng.random((1, 3, 2, 2)), rng.random((1, 3, 2, 2))
    pred1, y1 = rng.random((1, 3, 1, 1)), rng.random((1, 3, 1, 1))
    m2 = np.array([[[1.0, 0.0], [1.0, 1.0]]])
    m1 = np.array([[[0.75]]])

    expected = 0.0
    for pred, y, m in ((pred2, y2, m2), (pred1, y1, m1)):
        num = 0.0
        for i in range(m.shape[1]):
            for j in range(m.shape[2]):
                num += m[0, i, j] * 0.5 * np.sum((y[0, :, i, j] - pred[0, :, i, j]) ** 2)
        expected += num / m.sum()

    result = local_mim_loss(
        {1: Tensor(pred2), 2: Tensor(pred1)},
        SupervisionTarget({2: y2, 1: y1}),
        SimpleNamespace(scale_masks={2: m2, 1: m1}),
    )
    assert result.total.item() == pytest.approx(expected, abs=1e-12)
    assert sum(result.term_values().values()) == pytest.approx(expected, abs=1e-12)


def test_no_gradient_at_unmasked_positions():
    rng = np.random.default_rng(3)
    pred = Tensor(rng.random((1, 9, 4, 4)), requires_grad=True)
    mask = (rng.random((1, 4, 4)) > 0.5).astype(float)
    mask[0, 0, 0] = 1.0
    tape = Tape()
    with recording(tape):
        loss = local_mim_loss({1: pred}, SupervisionTarget({4: rng.random((1, 9, 4, 4))}), SimpleNamespace(scale_masks={4: mask})).total
    grad = backward(tape, loss)[pred.node_id].data
    assert np.all(grad[:, :, mask[0] == 0] == 0.0)
    assert np.any(grad[:, :, mask[0] == 1] != 0.0)


def test_weights_scale_terms():
    rng = np.random.default_rng(4)
    pred, y = rng.random((1, 9, 4, 4)), rng.random((1, 9, 4, 4))
    masks = SimpleNamespace(scale_masks={4: np.ones((1, 4, 4))})
    base = local_mim_loss({1: Tensor(pred)}, SupervisionTarget({4: y}), masks).total.item()
    doubled = local_mim_loss({1: Tensor(pred)}, SupervisionTarget({4: y}), masks, weights={1: 2.0}).total.item()
    assert doubled == pytest.approx(2 * base)


def test_batch_order_does_not_change_the_loss():
    rng = np.random.default_rng(5)
    plans = [sample_mask(100 + j, 16, 0.75, (4, 2)) for j in range(5)]
    masks = MaskBatch.from_plans(plans)
    preds = {1: rng.random((5, 9, 4, 4)), 2: rng.random((5, 9, 2, 2))}
    targets = {4: rng.random((5, 9, 4, 4)), 2: rng.random((5, 9, 2, 2))}
    base = local_mim_loss({k: Tensor(v) for k, v in preds.items()}, SupervisionTarget(targets), masks)

    order = np.array([3, 0, 4, 2, 1])
    shuffled = local_mim_loss(
        {k: Tensor(v[order]) for k, v in preds.items()},
        SupervisionTarget({s: y[order] for s, y in targets.items()}),
        SimpleNamespace(scale_masks={s: m[order] for s, m in masks.scale_masks.items()}),
    )
    assert shuffled.total.item() == pytest.approx(base.total.item(), abs=1e-12)
    for tap, value in base.term_values().items():
        assert shuffled.term_values()[tap] == pytest.approx(value, abs=1e-12)


def test_empty_predictions_signal_completion():
    result = local_mim_loss({}, SupervisionTarget({}), SimpleNamespace(scale_masks={}))
    assert result.complete
    assert result.total.item() == 0.0
