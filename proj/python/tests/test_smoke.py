import json
from pathlib import Path

import pytest

import fademac


def test_link_ratio_at_ideal_range():
    params = fademac.PropagationParams()
    assert fademac.link_delivery_ratio(params, 250.0) == pytest.approx(0.5, abs=1e-9)
    assert fademac.link_delivery_ratio(params, 220.0) == pytest.approx(0.66143400443865264832, rel=1e-12)
    d = fademac.distance_for_delivery_ratio(params, 0.661)
    assert d == pytest.approx(220.08012728959191714, rel=1e-9)


def test_retry_and_backoff():
    assert fademac.expected_backoff_slots(1.0) == 15.5
    assert fademac.expected_backoff_slots(0.0) == 511.5
    assert fademac.packet_delivery_no_rts(0.7) == pytest.approx(1 - 0.51**4)
    limits = fademac.RetryLimits()
    assert fademac.packet_delivery(0.7, limits) == pytest.approx(0.84569683999552131495, rel=1e-12)
    assert fademac.backoff_stationary_mean_slots(0.9) == pytest.approx(fademac.expected_backoff_slots(0.9))


def test_geometry():
    g = fademac.CaptureParams()
    assert fademac.capture_line(g, 100.0) == pytest.approx(100.0 * 10 ** 0.25)
    assert fademac.ca_blocks(g, 250.0)
    assert not fademac.csma_blocks(g, 200.0, 400.0, fademac.CsmaCase.WORST)
    assert fademac.csma_blocks(g, 200.0, 400.0, fademac.CsmaCase.AVERAGE)


def test_capacity_orders_modes():
    basic = fademac.saturation_capacity(200.0, rts_cts=False, duration_s=5.0, seed=3)
    rts = fademac.saturation_capacity(200.0, rts_cts=True, duration_s=5.0, seed=3)
    assert 0.0 < rts < basic < 2e6


def test_config_errors():
    with pytest.raises(fademac.ConfigError):
        fademac.config_text("[propagation]\nsigma_db = -1\n")
    text = fademac.config_text("", ["mac.lrl=6"])
    assert "lrl = 6" in text
    assert fademac.config_text(text) == text


def test_unknown_experiment_lists_registry():
    names = fademac.experiments()
    assert len(names) == 11
    with pytest.raises(fademac.UnknownExperiment) as err:
        fademac.run_experiment("nope", "/tmp")
    assert "capture-geometry" in str(err.value)


def test_run_and_rerun(tmp_path: Path):
    overrides = ["run.replications=2", "experiment.sim_duration_s=1", "experiment.delay_distances=100,200"]
    manifest = fademac.run_experiment("delay", tmp_path / "a", overrides=overrides)
    assert manifest["experiment"] == "delay"
    assert "delay.csv" in manifest["outputs"]
    header = (tmp_path / "a" / "delay.csv").read_text().splitlines()[0]
    assert header.startswith("distance_m,")
    stored = json.loads((tmp_path / "a" / "delay.manifest.json").read_text())
    assert stored["experiment"] == "delay"
    identical, mismatched = fademac.rerun(tmp_path / "a" / "delay.manifest.json", tmp_path / "b")
    assert identical and mismatched == []


def test_geometry_experiment_checks(tmp_path: Path):
    manifest = fademac.run_experiment("capture-geometry", tmp_path)
    assert manifest["checks"] and all(passed for _, passed, _ in manifest["checks"])
    assert len(manifest["digest"]) == 64
