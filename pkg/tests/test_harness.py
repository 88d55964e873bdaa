import json
import math

import numpy as np
import pytest

from regwave import cli
from regwave.errors import IntegrityError
from regwave.experiments import REGISTRY, list_experiments
from regwave.harness import (
    ConfigError,
    ExperimentReport,
    Metric,
    RunConfig,
    UnknownExperimentError,
    config_hash,
    default_R,
    execute,
    parallel_map,
    persist,
    spawn_seeds,
    verify_run_dir,
    worker_count,
)

SMOKE = {
    "identity-suite": dict(num_seeds=1),
    "y-expansion": {},
    "exchangeability": dict(n=8, ell=0, R=0, trials=300),
    "gaussian-wave-cov": dict(n=100, ensemble_size=10, r=1),
    "tw1-edge": dict(n=100, ensemble_size=100, embed_n=200, reference_size=100),
    "rigidity": dict(n=100, num_seeds=2),
    "poisson-smoothing": dict(n=100, num_seeds=2),
    "switch-moment-exact": dict(n=100, num_seeds=2),
    "local-law": dict(n=100, num_seeds=2),
    "counting-functional": dict(n=100, num_seeds=2),
    "hs-diagnostic": dict(n=200, num_seeds=1),
    "wigner-baseline": dict(n=100, ensemble_size=10, embed_n=200, reference_size=10),
}


def write_config(tmp_path, **kw):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(kw))
    return path


# config


def test_defaults_and_R():
    cfg = RunConfig("tw1-edge")
    assert (cfg.n, cfg.d, cfg.ensemble_size, cfg.ell, cfg.r) == (1000, 3, 500, 1, 2)
    assert cfg.R == default_R(1000, 3) == math.floor(math.log2(1000) / 8)


def test_kebab_roundtrip():
    cfg = RunConfig.from_dict({"experiment": "rigidity", "num-seeds": 3, "spectral-method": "dense", "tolerances": {"bound": 2}})
    assert cfg.num_seeds == 3 and cfg.spectral_method == "dense"
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    assert "num-seeds" in cfg.to_dict()


@pytest.mark.parametrize(
    "bad",
    [
        {"experiment": "rigidity", "n": 7},
        {"experiment": "rigidity", "d": 2},
        {"experiment": "rigidity", "ensemble-size": 0},
        {"experiment": "rigidity", "n": True},
        {"experiment": "rigidity", "n": 10.5},
        {"experiment": "rigidity", "spectral-method": "qr"},
        {"experiment": "rigidity", "tolerances": {"ks": -1}},
        {"experiment": "rigidity", "ell": -1},
        {"experiment": "rigidity", "bogus": 1},
        {"n": 100},
    ],
)
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(bad)


def test_unknown_experiment():
    with pytest.raises(UnknownExperimentError):
        RunConfig("nope")


def test_invalid_json():
    with pytest.raises(ConfigError):
        RunConfig.from_json("{not json")


def test_digest_tracks_every_field():
    a = RunConfig("rigidity", seed=1)
    assert a.digest() == RunConfig("rigidity", seed=1).digest()
    assert a.digest() != RunConfig("rigidity", seed=2).digest()
    assert a.digest() == config_hash(json.loads(json.dumps(a.to_dict())))


# metrics and reports


@pytest.mark.parametrize(
    "metric,passed",
    [
        (Metric("a", 1.0, 2.0, "le"), True),
        (Metric("a", 3.0, 2.0, "le"), False),
        (Metric("a", 3.0, 2.0, "ge"), True),
        (Metric("a", 0.9, 0.1, "near", 1.0), True),
        (Metric("a", 0.8, 0.1, "near", 1.0), False),
        (Metric("a", float("nan"), 2.0, "le"), False),
        (Metric("a", 99.0, 2.0, "le", acceptance=False), True),
    ],
)
def test_metric_rules(metric, passed):
    assert metric.passed is passed
    assert ("FAIL" in metric.describe()) is (not passed)


def test_report_pass_flag_from_metrics():
    r = ExperimentReport("x", [Metric("a", 1.0, 2.0), Metric("b", 1.0, 0.5)], 1, "h", 0)
    assert not r.passed
    assert r.metric("a").passed
    assert json.loads(r.to_json())["passed"] is False
    with pytest.raises(KeyError):
        r.metric("c")


# seeding and workers


def test_spawn_seeds_are_layout_free():
    a = spawn_seeds(5, 10, stream=1)
    b = spawn_seeds(5, 4, stream=1)
    assert [s.generate_state(2).tolist() for s in a[:4]] == [s.generate_state(2).tolist() for s in b]
    c = spawn_seeds(5, 4, stream=2)
    assert a[0].generate_state(2).tolist() != c[0].generate_state(2).tolist()


def test_parallel_map_preserves_order():
    items = list(range(12))
    assert parallel_map(math.factorial, items, workers=2) == [math.factorial(k) for k in items]


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("REGWAVE_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("REGWAVE_WORKERS", "many")
    with pytest.raises(ConfigError):
        worker_count()


# registry


def test_registry_contents():
    names = [n for n, _, _ in list_experiments()]
    for required in ("tw1-edge", "gaussian-wave-cov", "switch-moment-exact"):
        assert required in names
    assert set(SMOKE) == set(REGISTRY)
    assert all(desc and anchor for _, desc, anchor in list_experiments())


@pytest.mark.parametrize("name", sorted(SMOKE))
def test_every_experiment_runs(name):
    report = execute(RunConfig(name, **SMOKE[name]))
    assert report.metrics and report.sample_count > 0
    assert all(np.isfinite(m.value) for m in report.metrics)


# persistence


def test_persist_layout_and_integrity(tmp_path):
    cfg = RunConfig("switch-moment-exact", n=60, num_seeds=2)
    report = execute(cfg)
    run_dir = persist(cfg, report, tmp_path)
    assert run_dir.parent == tmp_path / "switch-moment-exact"
    assert run_dir.name.endswith(cfg.digest()[:12])
    files = {p.name for p in run_dir.iterdir()}
    assert {"manifest.json", "report.json", "residuals.csv"} <= files
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["master-seed"] == cfg.seed and manifest["config-hash"] == cfg.digest()
    assert "code-version" in manifest and "runtime-seconds" in manifest
    assert verify_run_dir(run_dir)


def test_tampered_config_detected(tmp_path):
    cfg = RunConfig("switch-moment-exact", n=60, num_seeds=1)
    run_dir = persist(cfg, execute(cfg), tmp_path)
    mpath = run_dir / "manifest.json"
    manifest = json.loads(mpath.read_text())
    manifest["config"]["n"] = 62
    mpath.write_text(json.dumps(manifest))
    with pytest.raises(IntegrityError):
        verify_run_dir(run_dir)


def test_tampered_pass_flag_detected(tmp_path):
    cfg = RunConfig("switch-moment-exact", n=60, num_seeds=1)
    run_dir = persist(cfg, execute(cfg), tmp_path)
    rpath = run_dir / "report.json"
    rep = json.loads(rpath.read_text())
    rep["metrics"][0]["value"] = 1.0
    rpath.write_text(json.dumps(rep))
    with pytest.raises(IntegrityError):
        verify_run_dir(run_dir)


def test_rerun_is_byte_identical():
    cfg = RunConfig("tw1-edge", **SMOKE["tw1-edge"])
    a, b = execute(cfg), execute(cfg)
    assert a.to_json() == b.to_json() and a.tables == b.tables


# command line


def test_cli_list(capsys):
    assert cli.main(["list"]) == 0
    assert "gaussian-wave-cov" in capsys.readouterr().out


def test_cli_run_pass(tmp_path, capsys):
    path = write_config(tmp_path, experiment="switch-moment-exact", n=60, **{"num-seeds": 1})
    assert cli.main(["run", str(path), "--out", str(tmp_path / "out")]) == 0
    assert "PASS" in capsys.readouterr().out
    assert list((tmp_path / "out" / "switch-moment-exact").iterdir())


def test_cli_metric_failure(tmp_path):
    path = write_config(tmp_path, experiment="switch-moment-exact", n=60, **{"num-seeds": 1, "tolerances": {"excluded-constant": 1e-12}})
    assert cli.main(["run", str(path), "--out", str(tmp_path)]) == 1


def test_cli_zero_ensemble_is_config_error(tmp_path):
    path = write_config(tmp_path, experiment="gaussian-wave-cov", **{"ensemble-size": 0})
    assert cli.main(["run", str(path)]) == 2


def test_cli_unknown_experiment(tmp_path):
    assert cli.main(["run", str(write_config(tmp_path, experiment="nope"))]) == 3


def test_cli_io_errors(tmp_path):
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 4
    blocker = tmp_path / "blocked"
    blocker.write_text("")
    path = write_config(tmp_path, experiment="switch-moment-exact", n=60, **{"num-seeds": 1})
    assert cli.main(["run", str(path), "--out", str(blocker)]) == 4


def test_cli_runtime_error(tmp_path):
    # too few samples for the KS test
    path = write_config(tmp_path, experiment="tw1-edge", n=60, **{"ensemble-size": 5, "embed-n": 200, "reference-size": 5})
    assert cli.main(["run", str(path)]) == 5


def test_shipped_configs_load():
    from pathlib import Path

    paths = sorted((Path(__file__).parents[1] / "scripts" / "configs").glob("*.json"))
    assert paths
    names = {RunConfig.load(p).experiment for p in paths}
    assert names == set(REGISTRY)
