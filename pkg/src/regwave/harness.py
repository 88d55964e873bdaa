"""Config-driven experiment runner: configs, reports, seeding and persisted artifacts."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from regwave.errors import IntegrityError, ParameterError, RegwaveError

WORKERS_ENV = "REGWAVE_WORKERS"


class ConfigError(ParameterError):
    pass


class UnknownExperimentError(RegwaveError, KeyError):
    pass


class ArtifactIOError(RegwaveError, OSError):
    pass


def default_R(n, d):
    return int(math.floor(math.log(n) / math.log(d - 1) / 8))


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    n: int = 1000
    d: int = 3
    ensemble_size: int = 500
    ell: int = 1
    r: int = 2
    R: int | None = None
    spectral_method: str = "lanczos"
    seed: int = 20240617
    num_seeds: int = 20
    trials: int = 100000
    embed_n: int = 2000
    reference_size: int = 2000
    tolerances: dict = field(default_factory=dict)
    out_dir: str = "out"

    def __post_init__(self):
        if self.R is None:
            object.__setattr__(self, "R", default_R(self.n, self.d) if self.d >= 3 and self.n > 1 else 0)
        self.validate()

    def validate(self):
        from regwave.experiments import REGISTRY

        if self.experiment not in REGISTRY:
            raise UnknownExperimentError(self.experiment)
        ints = ("n", "d", "ensemble_size", "ell", "r", "R", "seed", "num_seeds", "trials", "embed_n", "reference_size")
        for name in ints:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{_kebab(name)} must be an integer")
        if self.d < 3:
            raise ConfigError("d must be at least 3")
        if self.n <= self.d or (self.n * self.d) % 2:
            raise ConfigError("need n > d and n*d even")
        for name in ("ensemble_size", "num_seeds", "trials", "embed_n", "reference_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{_kebab(name)} must be positive")
        if min(self.ell, self.r, self.R) < 0 or self.seed < 0:
            raise ConfigError("radii and seed must be nonnegative")
        if self.spectral_method not in ("dense", "lanczos"):
            raise ConfigError("spectral-method must be 'dense' or 'lanczos'")
        if not isinstance(self.tolerances, dict):
            raise ConfigError("tolerances must be an object")
        for k, v in self.tolerances.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerance {k!r} must be positive")

    def tol(self, name, default):
        return float(self.tolerances.get(name, default))

    def to_dict(self):
        return {_kebab(f.name): getattr(self, f.name) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, obj):
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        names = {_kebab(f.name): f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - set(names)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in obj:
            raise ConfigError("missing 'experiment'")
        return cls(**{names[k]: v for k, v in obj.items()})

    @classmethod
    def from_json(cls, text):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(obj)

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ArtifactIOError(str(exc)) from exc
        return cls.from_json(text)

    def digest(self):
        return config_hash(self.to_dict())


def _kebab(name):
    return name.replace("_", "-")


def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg_dict):
    return hashlib.sha256(_canonical(cfg_dict).encode()).hexdigest()


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class Metric:
    """A recorded value with its acceptance rule.

    ``rule`` is one of ``"le"`` (value <= tolerance), ``"ge"``
    (value >= tolerance) or ``"near"`` (|value - target| <= tolerance).
    Non-acceptance metrics are report-only and never fail a run.
    """

    name: str
    value: float
    tolerance: float | None = None
    rule: str = "le"
    target: float | None = None
    samples: int = 1
    acceptance: bool = True

    @property
    def passed(self):
        if self.tolerance is None or not self.acceptance:
            return True
        v = self.value
        if not math.isfinite(v):
            return False
        if self.rule == "le":
            return v <= self.tolerance
        if self.rule == "ge":
            return v >= self.tolerance
        if self.rule == "near":
            return abs(v - self.target) <= self.tolerance
        raise ParameterError(f"unknown rule {self.rule!r}")

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["passed"] = self.passed
        return d

    def describe(self):
        if self.tolerance is None or not self.acceptance:
            return f"{self.name} = {self.value:.6g} (report only)"
        if self.rule == "near":
            rel = f"within {self.tolerance:g} of {self.target:g}"
        else:
            rel = f"{'<=' if self.rule == 'le' else '>='} {self.tolerance:g}"
        return f"{self.name} = {self.value:.6g} {rel}: {'PASS' if self.passed else 'FAIL'}"


@dataclass
class ExperimentReport:
    name: str
    metrics: list
    sample_count: int
    config_hash: str
    seed: int
    runtime: float = 0.0
    notes: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # csv name -> text

    @property
    def passed(self):
        return all(m.passed for m in self.metrics)

    def metric(self, name):
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(name)

    def to_dict(self):
        """Deterministic content: runtime and timestamps live in the manifest."""
        return {
            "name": self.name,
            "config-hash": self.config_hash,
            "seed": self.seed,
            "sample-count": self.sample_count,
            "passed": self.passed,
            "metrics": [m.to_dict() for m in self.metrics],
            "notes": self.notes,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


# --------------------------------------------------------------------------
# seeding and parallel map


def spawn_seeds(master, count, stream=0):
    """Child SeedSequences keyed by (master, stream, index), independent of worker layout."""
    return np.random.SeedSequence(master, spawn_key=(stream,)).spawn(count)


def worker_count():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        k = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV} must be an integer") from exc
    return max(1, k)


def parallel_map(func, items, workers=None):
    """Ordered map; results are keyed by input position so completion order is irrelevant."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * workers))))


# --------------------------------------------------------------------------
# running and persistence


def code_version():
    try:
        return metadata.version("regwave")
    except metadata.PackageNotFoundError:
        return "unknown"


def execute(config):
    """Run the experiment in memory and return its report."""
    from regwave.experiments import REGISTRY

    spec = REGISTRY[config.experiment]
    t0 = time.perf_counter()
    report = spec.func(config)
    report.runtime = time.perf_counter() - t0
    report.config_hash = config.digest()
    report.seed = config.seed
    return report


def persist(config, report, root=None):
    """Write manifest.json, report.json and CSV tables; returns the run directory."""
    root = Path(root if root is not None else config.out_dir)
    h = config.digest()
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    run_dir = root / config.experiment / f"{stamp}-{h[:12]}"
    manifest = {
        "experiment": config.experiment,
        "config": config.to_dict(),
        "config-hash": h,
        "code-version": code_version(),
        "master-seed": config.seed,
        "timestamp": stamp,
        "runtime-seconds": report.runtime,
        "numpy": np.__version__,
        "tables": sorted(report.tables),
    }
    try:
        run_dir.mkdir(parents=True, exist_ok=False)
        (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        (run_dir / "report.json").write_text(report.to_json())
        for name, text in report.tables.items():
            (run_dir / f"{name}.csv").write_text(text)
    except OSError as exc:
        raise ArtifactIOError(str(exc)) from exc
    return run_dir


def run(config, root=None):
    report = execute(config)
    return report, persist(config, report, root)


def verify_run_dir(run_dir):
    """Check that the manifest config, its hash and the report agree; raise IntegrityError otherwise."""
    run_dir = Path(run_dir)
    try:
        manifest = json.loads((run_dir / "manifest.json").read_text())
        report = json.loads((run_dir / "report.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactIOError(str(exc)) from exc
    h = config_hash(manifest["config"])
    if h != manifest["config-hash"]:
        raise IntegrityError("manifest config does not match its recorded hash")
    if report.get("config-hash") != h:
        raise IntegrityError("report was produced by a different config")
    for m in report["metrics"]:
        if m["passed"] != Metric(**{k: v for k, v in m.items() if k != "passed"}).passed:
            raise IntegrityError(f"pass flag of {m['name']!r} disagrees with its value and tolerance")
    return True


# --------------------------------------------------------------------------
# small CSV helper


def csv_table(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)
