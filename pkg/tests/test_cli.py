"""
CLI ``vitfreeze``: subcomandos, archivos de salida y códigos de salida.
"""

import json

import pytest

from vitfreeze.main import main
from vitfreeze.models.checkpoint import read_checkpoint
from vitfreeze.settings import get_settings
from vitfreeze.training.trainer import Trainer
from vitfreeze.utils.errors import TrainingDiverged

SMALL_RUN = {
    "model": {"embed_dim": 32, "num_heads": 2, "decoder_dim": 16, "decoder_heads": 2},
    "trainer": {"batch_size": 2, "steps": 12, "warmup_discard": 0, "record_timing": False},
    "data": {"count": 4},
}

# ⌈t_i·12⌉ = 7, 8, 9, 11, 12 con vit-toy
SMALL_RUN_EVENTS = [
    "step=7 freeze layer=0",
    "step=8 freeze layer=1",
    "step=8 prune head=1",
    "step=9 freeze layer=2",
    "step=9 prune head=2",
    "step=11 freeze layer=3",
    "step=11 prune head=3",
    "step=12 freeze layer=4",
    "step=12 prune head=4",
]


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    for name in ("VITFREEZE_THREADS", "VITFREEZE_LOG_LEVEL", "VITFREEZE_DEBUG"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(SMALL_RUN), encoding="utf-8")
    return path


def run_train(config_path, outdir, *extra):
    return main(["train", "--preset", "vit-toy", "--config", str(config_path), "--out", str(outdir), *extra])


# ============================================
# SCHEDULE
# ============================================
def test_schedule_writes_csv_svg_and_echo(tmp_path):
    out = tmp_path / "sched"
    assert main(["schedule", "--preset", "vit-b", "--out", str(out)]) == 0
    lines = (out / "schedule.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 13 * 1000 + 1
    assert (out / "schedule.svg").exists()
    echo = json.loads((out / "resolved_config.json").read_text(encoding="utf-8"))
    assert echo["schedule"]["num_layers"] == 13
    assert echo["output_dir"] == str(out)


def test_schedule_outputs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["schedule", "--preset", "vit-toy", "--out", str(tmp_path / name)]) == 0
    for f in ("schedule.csv", "schedule.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_schedule_points_option(tmp_path):
    assert main(["schedule", "--out", str(tmp_path), "--points", "11"]) == 0
    assert len((tmp_path / "schedule.csv").read_text(encoding="utf-8").splitlines()) == 5 * 11 + 1


# ============================================
# PREDICT-SPEEDUP
# ============================================
def test_predict_speedup_for_vit_b(tmp_path, capsys):
    assert main(["predict-speedup", "--preset", "vit-b", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "speedup.json").read_text(encoding="utf-8"))
    assert report["predicted_reduction"] >= 0.10
    assert report["reference_reduction"] == pytest.approx(0.125)
    assert "MODELO DE COSTO" in capsys.readouterr().out


# ============================================
# GRAD-CHECK
# ============================================
def test_grad_check_single_seed_without_model(tmp_path):
    assert main(["grad-check", "--skip-model", "--seeds", "1", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "gradcheck.json").read_text(encoding="utf-8"))
    assert summary["failed"] == 0
    assert {r["seed"] for r in summary["results"]} == {0}


def test_grad_check_failure_exits_3(tmp_path):
    # tolerancia imposible
    assert main(["grad-check", "--skip-model", "--seeds", "1", "--tolerance", "0", "--out", str(tmp_path)]) == 3


# ============================================
# TRAIN
# ============================================
def test_train_writes_reports_and_checkpoint(tmp_path, small_config):
    out = tmp_path / "run"
    assert run_train(small_config, out) == 0
    for name in ("report.json", "trace.csv", "events.log", "schedule.csv", "schedule.svg", "model.vtfz"):
        assert (out / name).exists(), name
    assert not (out / "diagnostics.json").exists()

    assert (out / "events.log").read_text(encoding="utf-8").splitlines() == SMALL_RUN_EVENTS
    trace = (out / "trace.csv").read_text(encoding="utf-8").splitlines()
    assert trace[0] == "step,loss,iter_ms,frozen_prefix,alive_heads"
    assert len(trace) == 13
    assert trace[1].endswith(",0.000,0,4")

    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["steps_run"] == 12 and not report["aborted"]
    assert "iter_ms" not in report
    assert read_checkpoint(out / "model.vtfz").metadata["encoder.layers.4"] == (True, 12)


def test_train_is_byte_identical_across_runs(tmp_path, small_config):
    assert run_train(small_config, tmp_path / "a") == 0
    assert run_train(small_config, tmp_path / "b") == 0
    for f in ("report.json", "trace.csv", "events.log", "model.vtfz"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_seed_flag_changes_the_run(tmp_path, small_config):
    assert run_train(small_config, tmp_path / "a", "--seed", "0") == 0
    assert run_train(small_config, tmp_path / "b", "--seed", "5") == 0
    assert (tmp_path / "a" / "trace.csv").read_bytes() != (tmp_path / "b" / "trace.csv").read_bytes()
    echo = json.loads((tmp_path / "b" / "resolved_config.json").read_text(encoding="utf-8"))
    assert echo["trainer"]["seed"] == 5


def test_threads_setting_keeps_outputs(tmp_path, small_config, monkeypatch):
    assert run_train(small_config, tmp_path / "a") == 0
    monkeypatch.setenv("VITFREEZE_THREADS", "2")
    get_settings.cache_clear()
    assert run_train(small_config, tmp_path / "b") == 0
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()


def test_train_abort_exits_2_with_diagnostics(tmp_path, small_config, monkeypatch):
    def diverge(self, batch):
        raise TrainingDiverged("pérdida no finita en la iteración 1", {"step": batch.step, "loss": "nan"})

    monkeypatch.setattr(Trainer, "measure_iteration", diverge)
    out = tmp_path / "run"
    assert run_train(small_config, out) == 2
    diagnostics = json.loads((out / "diagnostics.json").read_text(encoding="utf-8"))
    assert diagnostics == {"step": 1, "loss": "nan"}
    assert (out / "events.log").read_text(encoding="utf-8").splitlines() == ["step=1 abort loss=nan"]
    assert not (out / "model.vtfz").exists()


def test_baseline_abort_keeps_the_frozen_run_outputs(tmp_path, small_config, monkeypatch):
    original = Trainer.measure_iteration

    def diverge_baseline(self, batch):
        if not self.config.trainer.freeze:
            raise TrainingDiverged("pérdida no finita en la iteración 1", {"step": batch.step, "loss": "nan"})
        return original(self, batch)

    monkeypatch.setattr(Trainer, "measure_iteration", diverge_baseline)
    out = tmp_path / "run"
    assert run_train(small_config, out, "--compare-baseline") == 2
    for name in ("schedule.csv", "schedule.svg", "trace.csv", "report.json", "model.vtfz"):
        assert (out / name).exists(), name
    assert (out / "events.log").read_text(encoding="utf-8").splitlines() == SMALL_RUN_EVENTS
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["steps_run"] == 12 and not report["aborted"]
    diagnostics = json.loads((out / "diagnostics.json").read_text(encoding="utf-8"))
    assert diagnostics == {"run": "baseline", "step": 1, "loss": "nan"}


# ============================================
# ERRORES
# ============================================
def test_invalid_config_exits_1_naming_the_key(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schedule": {"t0": 1.5}}), encoding="utf-8")
    assert main(["schedule", "--config", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "schedule.t0" in capsys.readouterr().err


def test_unwritable_output_dir_exits_1(tmp_path):
    blocker = tmp_path / "archivo"
    blocker.write_text("x", encoding="utf-8")
    assert main(["schedule", "--out", str(blocker / "sub")]) == 1


def test_invalid_environment_exits_1(tmp_path, monkeypatch):
    monkeypatch.setenv("VITFREEZE_THREADS", "-1")
    get_settings.cache_clear()
    assert main(["schedule", "--out", str(tmp_path)]) == 1


def test_dotenv_file_is_loaded_without_overriding_environment(tmp_path, monkeypatch):
    (tmp_path / ".env").write_text("VITFREEZE_THREADS=3\nVITFREEZE_LOG_LEVEL=debug\n", encoding="utf-8")
    monkeypatch.chdir(tmp_path)
    # registra las variables para que se limpien al terminar
    monkeypatch.setenv("VITFREEZE_THREADS", "0")
    monkeypatch.delenv("VITFREEZE_THREADS")
    monkeypatch.setenv("VITFREEZE_LOG_LEVEL", "WARNING")
    settings = get_settings()
    assert settings.threads == 3
    assert settings.log_level == "WARNING"


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "vitfreeze" in capsys.readouterr().out
