"""
Tiempos de congelamiento, curvas de learning rate, eventos y exportación.
"""

import csv

import numpy as np
import pytest

from vitfreeze.schedule.export import SCHEDULE_HEADER, export_schedule_csv, export_schedule_svg
from vitfreeze.schedule.freezeout import (
    FreezeEventTracker,
    LayerSchedule,
    compute_freeze_times,
    freeze_events,
    initial_lr,
    iteration_time,
    lr_curve_integral,
    lr_integrals,
    step_for_time,
)
from vitfreeze.schemas.schedule import ScheduleConfig
from vitfreeze.utils.errors import ConfigError, ContractError


def make_schedule(warmup: float = 0.0, layers: int = 13, alpha: float = 1.0, **kwargs) -> LayerSchedule:
    config = ScheduleConfig(warmup_fraction=warmup, **kwargs)
    return LayerSchedule.build(config, alpha=alpha, num_layers=layers)


# ============================================
# TIEMPOS DE CONGELAMIENTO
# ============================================
def test_cubic_half_gives_one_eighth():
    assert compute_freeze_times(13, 0.5, "cubic")[0] == 0.125


def test_cubic_point_eight_gives_0512():
    assert compute_freeze_times(13, 0.8, "cubic")[0] == pytest.approx(0.512, abs=1e-15)


@pytest.mark.parametrize("spacing", ["linear", "cubic"])
def test_last_layer_freezes_at_one(spacing):
    assert compute_freeze_times(13, 0.8, spacing)[-1] == 1.0


def test_linear_spacing_is_uniform():
    times = compute_freeze_times(5, 0.6, "linear")
    assert times == pytest.approx([0.6, 0.7, 0.8, 0.9, 1.0])


def test_times_strictly_increase_and_cubic_is_earlier():
    lin = compute_freeze_times(13, 0.8, "linear")
    cub = compute_freeze_times(13, 0.8, "cubic")
    assert all(b > a for a, b in zip(cub, cub[1:]))
    assert all(c < l for c, l in zip(cub[:-1], lin[:-1]))


def test_t0_one_gives_all_ones():
    assert compute_freeze_times(13, 1.0, "cubic") == [1.0] * 13


@pytest.mark.parametrize("t0", [0.0, -0.2, 1.5])
def test_t0_out_of_range(t0):
    with pytest.raises(ConfigError, match=r"\(0, 1\]"):
        compute_freeze_times(13, t0)


def test_single_layer_is_rejected():
    with pytest.raises(ContractError):
        compute_freeze_times(1, 0.8)


# ============================================
# LEARNING RATE INICIAL
# ============================================
def test_initial_lr_examples():
    assert initial_lr(1.0, 1.0) == 1.0
    assert initial_lr(1.0, 0.512) == pytest.approx(1.953125, abs=1e-15)
    assert initial_lr(0.3, 0.512, "unscaled") == 0.3


def test_initial_lr_rejects_non_positive_time():
    with pytest.raises(ContractError):
        initial_lr(1.0, 0.0)


def test_scaled_product_equals_alpha_for_vit_b():
    sched = make_schedule(layers=13, alpha=1.5e-4)
    for t, a0 in zip(sched.freeze_times, sched.initial_lrs):
        assert a0 * t == pytest.approx(1.5e-4, rel=1e-15)


# ============================================
# CURVAS
# ============================================
def test_lr_is_zero_at_and_after_freeze_time():
    sched = make_schedule(warmup=0.1)
    for i, t in enumerate(sched.freeze_times):
        assert sched.lr_at(i, t) == 0.0
        assert sched.lr_at(i, min(1.0, t + 0.01)) == 0.0


def test_lr_half_way_without_warmup():
    sched = make_schedule()
    t = sched.freeze_times[3]
    assert sched.lr_at(3, t / 2) == pytest.approx(0.5 * sched.initial_lrs[3], rel=1e-12)


def test_warmup_ramp_midpoint():
    sched = LayerSchedule((0.5, 1.0), (2.0, 1.0), warmup=0.1, alpha=1.0)
    assert sched.lr_at(0, 0.05) == pytest.approx(1.0)


def test_curves_are_continuous():
    sched = make_schedule(warmup=0.1)
    t = np.linspace(0.0, 1.0, 100_001)
    for i in range(sched.num_layers):
        lr = sched.lr_at(i, t)
        jump = np.abs(np.diff(lr)).max()
        # el mayor salto es el de la pendiente de la rampa en un paso de la rejilla
        ramp_step = sched.initial_lrs[i] * (t[1] - t[0]) / sched.warmup
        assert jump <= ramp_step * (1 + 1e-9) + 1e-9 * sched.initial_lrs[i]


def test_decoder_lr_follows_a_single_cosine():
    sched = make_schedule(warmup=0.1, alpha=2.0)
    assert sched.decoder_lr(0.1) == pytest.approx(2.0)
    assert sched.decoder_lr(0.55) == pytest.approx(1.0)
    assert sched.decoder_lr(1.0) == 0.0


def test_warmup_must_precede_first_freeze():
    with pytest.raises(ValueError):
        ScheduleConfig(t0=0.5, warmup_fraction=0.2)


# ============================================
# INTEGRALES
# ============================================
def test_scaled_integrals_are_all_alpha_over_two():
    sched = make_schedule(alpha=1.0)
    for value in lr_integrals(sched):
        assert value == pytest.approx(0.5, rel=1e-6)


def test_unscaled_integrals_are_proportional_to_t():
    sched = make_schedule(lr_scaling="unscaled", alpha=1.0)
    for i, t in enumerate(sched.freeze_times):
        assert lr_curve_integral(i, sched) == pytest.approx(0.5 * t, rel=1e-6)


def test_warmup_keeps_scaled_integrals_equal():
    # rampa w·α_i(0)/2 más coseno (t_i − w)·α_i(0)/2
    sched = make_schedule(warmup=0.1, alpha=1.0)
    for value in lr_integrals(sched):
        assert value == pytest.approx(0.5, rel=1e-6)


# ============================================
# EVENTOS
# ============================================
def test_no_events_before_first_freeze():
    sched = make_schedule()
    assert freeze_events(sched, 500, 1000, set()) == []


def test_vit_b_at_052_freezes_only_patch_embedding():
    sched = make_schedule()
    assert sched.freeze_times[1] == pytest.approx((0.8 + 0.2 / 12) ** 3)
    assert freeze_events(sched, 520, 1000, set()) == [0]


def test_events_reported_once_and_complete():
    sched = make_schedule()
    tracker = FreezeEventTracker(sched, 100)
    seen = []
    for step in range(1, 101):
        seen.extend(tracker.update(step))
    assert seen == list(range(13))
    assert tracker.complete
    with pytest.raises(ContractError):
        tracker.update(50)


def test_toy_freeze_steps_for_500_iterations():
    sched = make_schedule(warmup=0.1, layers=5)
    assert sched.freeze_steps(500) == [256, 308, 365, 429, 500]


def test_step_for_time_tolerates_rounding():
    assert step_for_time(0.8**3, 500) == 256
    assert step_for_time(1e-6, 10) == 1
    assert step_for_time(1.0, 10) == 10


def test_iteration_time_starts_at_zero():
    assert iteration_time(1, 500) == 0.0
    assert iteration_time(501, 500) == 1.0


# ============================================
# EXPORTACIÓN
# ============================================
def test_csv_has_layers_times_1000_rows(tmp_path):
    sched = make_schedule()
    path = tmp_path / "schedule.csv"
    assert export_schedule_csv(sched, path) == 13 * 1000
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == SCHEDULE_HEADER
    assert len(rows) == 13 * 1000 + 1
    # la columna step es el índice entero del punto; la última curva termina en t = 1
    assert [r[3] for r in rows[1:4]] == ["0", "1", "2"]
    assert rows[-1][3] == "999" and float(rows[-1][4]) == 0.0
    assert rows[1001][0] == "1" and rows[1001][3] == "0"


def test_csv_is_byte_identical(tmp_path):
    sched = make_schedule(warmup=0.1)
    export_schedule_csv(sched, tmp_path / "a.csv")
    export_schedule_csv(sched, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_warmup_curves_start_at_zero_and_ramp():
    sched = make_schedule(warmup=0.1)
    t, lr = sched.grid()
    assert np.all(lr[:, 0] == 0.0)
    ramp = t < 0.1
    assert np.all(np.diff(lr[:, ramp], axis=1) > 0)


def test_svg_has_no_date_and_is_reproducible(tmp_path):
    sched = make_schedule()
    export_schedule_svg(sched, tmp_path / "a.svg")
    export_schedule_svg(sched, tmp_path / "b.svg")
    a = (tmp_path / "a.svg").read_text(encoding="utf-8")
    assert a.lstrip().startswith("<?xml")
    assert "<dc:date>" not in a
    assert a == (tmp_path / "b.svg").read_text(encoding="utf-8")
