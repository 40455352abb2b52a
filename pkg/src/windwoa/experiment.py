"""Leave-one-station-out experiment: repeated seeded splits, baseline
training per repetition, best-split selection, hybrid training on the
selected split, and reproducible report/record/plot-data emission.

Every random choice flows from the master seed through named streams
(per task, repetition, and stage), so a run is byte-reproducible no
matter how many worker processes execute it.
"""

from __future__ import annotations

import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .dataset import (DataError, LooTask, StationFrame, build_loo_tasks, fit_normalizer,
                      gilan_frame, load_csv, random_split)
from .metrics import (METRIC_COLUMNS, UNDEFINED, MetricReport, PredictionPair,
                      metric_report, report_json_dict)
from .mlp import MlpTopology, SampleSet
from .seeding import derive_seed
from .training import Normalization, TrainedModel, default_woa_config, train_mlp_baseline, train_mlp_woa


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class WoaSettings:
    population_size: int = 30
    max_iterations: int = 50
    weight_bound: float = 5.0
    spiral_constant: float = 1.0
    frozen_l: Optional[float] = None
    frozen_p: Optional[float] = None
    refinement_epochs: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError("woa.population_size must be >= 2")
        if self.max_iterations < 1:
            raise ConfigError("woa.max_iterations must be >= 1")
        if not self.weight_bound > 0:
            raise ConfigError("woa.weight_bound must be > 0")
        if not self.spiral_constant > 0:
            raise ConfigError("woa.spiral_constant must be > 0")
        if self.refinement_epochs < 0:
            raise ConfigError("woa.refinement_epochs must be >= 0")


@dataclass(frozen=True)
class SynthSpec:
    rows: int = 3600
    sd_fraction: float = 0.5

    def __post_init__(self):
        if self.rows < 2:
            raise ConfigError("synth.rows must be >= 2")
        if not self.sd_fraction > 0:
            raise ConfigError("synth.sd_fraction must be > 0")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment settings; the defaults are the study's values
    (50 repetitions, 70/30 split, 8 hidden units, 200 training epochs,
    population 30, 50 iterations)."""

    data_csv: Optional[str] = None
    synth: SynthSpec = field(default_factory=SynthSpec)
    repetitions: int = 50
    train_fraction: float = 0.7
    lm_epochs: int = 200
    hidden_units: int = 8
    woa: WoaSettings = field(default_factory=WoaSettings)
    master_seed: int = 0
    hybrid_per_repetition: bool = False

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.lm_epochs < 1:
            raise ConfigError("lm_epochs must be >= 1")
        if self.hidden_units < 1:
            raise ConfigError("hidden_units must be >= 1")

    def to_dict(self) -> dict:
        data = {"csv": self.data_csv} if self.data_csv else {
            "synth": {"rows": self.synth.rows, "sd_fraction": self.synth.sd_fraction}
        }
        return {
            "data": data,
            "repetitions": self.repetitions,
            "train_fraction": self.train_fraction,
            "lm_epochs": self.lm_epochs,
            "hidden_units": self.hidden_units,
            "woa": {
                "population_size": self.woa.population_size,
                "max_iterations": self.woa.max_iterations,
                "weight_bound": self.woa.weight_bound,
                "spiral_constant": self.woa.spiral_constant,
                "frozen_l": self.woa.frozen_l,
                "frozen_p": self.woa.frozen_p,
                "refinement_epochs": self.woa.refinement_epochs,
            },
            "master_seed": self.master_seed,
            "hybrid_per_repetition": self.hybrid_per_repetition,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        allowed = {"data", "repetitions", "train_fraction", "lm_epochs", "hidden_units",
                   "woa", "master_seed", "hybrid_per_repetition"}
        unknown = sorted(set(raw) - allowed)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

        data_csv = None
        synth = SynthSpec()
        data = raw.get("data", {})
        if data:
            if not isinstance(data, dict) or set(data) - {"csv", "synth"} or len(data) != 1:
                raise ConfigError('config "data" must be {"csv": path} or {"synth": {...}}')
            if "csv" in data:
                if not isinstance(data["csv"], str) or not data["csv"]:
                    raise ConfigError('config "data.csv" must be a non-empty path')
                data_csv = data["csv"]
            else:
                synth_raw = data["synth"] or {}
                unknown = sorted(set(synth_raw) - {"rows", "sd_fraction"})
                if unknown:
                    raise ConfigError(f"unknown synth key(s): {', '.join(unknown)}")
                synth = SynthSpec(rows=int(synth_raw.get("rows", 3600)),
                                  sd_fraction=float(synth_raw.get("sd_fraction", 0.5)))

        woa_raw = raw.get("woa", {})
        woa_allowed = {"population_size", "max_iterations", "weight_bound", "spiral_constant",
                       "frozen_l", "frozen_p", "refinement_epochs"}
        unknown = sorted(set(woa_raw) - woa_allowed)
        if unknown:
            raise ConfigError(f"unknown woa key(s): {', '.join(unknown)}")
        woa = WoaSettings(
            population_size=int(woa_raw.get("population_size", 30)),
            max_iterations=int(woa_raw.get("max_iterations", 50)),
            weight_bound=float(woa_raw.get("weight_bound", 5.0)),
            spiral_constant=float(woa_raw.get("spiral_constant", 1.0)),
            frozen_l=None if woa_raw.get("frozen_l") is None else float(woa_raw["frozen_l"]),
            frozen_p=None if woa_raw.get("frozen_p") is None else float(woa_raw["frozen_p"]),
            refinement_epochs=int(woa_raw.get("refinement_epochs", 0)),
        )

        try:
            return cls(
                data_csv=data_csv,
                synth=synth,
                repetitions=int(raw.get("repetitions", 50)),
                train_fraction=float(raw.get("train_fraction", 0.7)),
                lm_epochs=int(raw.get("lm_epochs", 200)),
                hidden_units=int(raw.get("hidden_units", 8)),
                woa=woa,
                master_seed=int(raw.get("master_seed", 0)),
                hybrid_per_repetition=bool(raw.get("hybrid_per_repetition", False)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid config value: {exc}") from None

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        # A run manifest embeds the resolved config; accept it for replay.
        if isinstance(raw, dict) and isinstance(raw.get("config"), dict):
            raw = raw["config"]
        return cls.from_dict(raw)


@dataclass
class RepetitionRecord:
    task: str
    baseline_id: str
    hybrid_id: str
    repetition: int
    split_seed: int
    baseline_training: Optional[MetricReport] = None
    baseline_testing: Optional[MetricReport] = None
    hybrid_training: Optional[MetricReport] = None
    hybrid_testing: Optional[MetricReport] = None
    selected: bool = False
    failed: Optional[str] = None

    def to_dict(self) -> dict:
        def phase_pair(training, testing):
            if training is None and testing is None:
                return None
            return {
                "training": None if training is None else report_json_dict(training),
                "testing": None if testing is None else report_json_dict(testing),
            }

        return {
            "task": self.task,
            "baseline_id": self.baseline_id,
            "hybrid_id": self.hybrid_id,
            "repetition": self.repetition,
            "split_seed": self.split_seed,
            "selected": self.selected,
            "failed": self.failed,
            "baseline": phase_pair(self.baseline_training, self.baseline_testing),
            "hybrid": phase_pair(self.hybrid_training, self.hybrid_testing),
        }


@dataclass
class TaskResult:
    task: LooTask
    records: list[RepetitionRecord]
    selected: Optional[RepetitionRecord]
    baseline_model: Optional[TrainedModel] = None
    hybrid_model: Optional[TrainedModel] = None
    test_observed: Optional[np.ndarray] = None
    baseline_test_predicted: Optional[np.ndarray] = None
    hybrid_test_predicted: Optional[np.ndarray] = None

    @property
    def selected_repetition(self) -> Optional[int]:
        return None if self.selected is None else self.selected.repetition

    @property
    def failed(self) -> bool:
        return self.selected is None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    frame: StationFrame
    tasks: list[LooTask]
    results: list[TaskResult]

    def hybrid_wins(self) -> tuple[int, int]:
        """Tasks where the hybrid's test RMSE is <= the baseline's."""
        wins = 0
        for result in self.results:
            record = result.selected
            if record is None or record.hybrid_testing is None or record.baseline_testing is None:
                continue
            h, b = record.hybrid_testing.rmse, record.baseline_testing.rmse
            if h is not None and b is not None and h <= b:
                wins += 1
        return wins, len(self.results)


def _task_matrices(frame: StationFrame, task: LooTask):
    ref_idx = [frame.column_index(name) for name in task.reference_stations]
    target_idx = frame.column_index(task.target_station)
    return frame.records[:, ref_idx], frame.records[:, target_idx]


def _prepare_split(frame, task, config, split_seed):
    """Split, fit normalization on the training rows, build the train set."""
    split = random_split(frame.n_rows, config.train_fraction, split_seed)
    columns = list(task.reference_stations) + [task.target_station]
    normalizer = fit_normalizer(frame, split.train_indices, columns)
    normalization = Normalization(
        feature_means=normalizer.means[:-1].copy(),
        feature_stds=normalizer.stds[:-1].copy(),
        target_mean=float(normalizer.means[-1]),
        target_std=float(normalizer.stds[-1]),
    )
    features, target = _task_matrices(frame, task)
    train_set = SampleSet(
        normalization.normalize_features(features[split.train_indices]),
        normalization.normalize_targets(target[split.train_indices]),
    )
    return split, normalization, train_set, features, target


def _phase_reports(model, features, target, split):
    train_pred = model.predict(features[split.train_indices])
    test_pred = model.predict(features[split.test_indices])
    training = metric_report(PredictionPair(target[split.train_indices], train_pred))
    testing = metric_report(PredictionPair(target[split.test_indices], test_pred))
    return training, testing, test_pred


def _train_hybrid(task, config, train_set, topology, repetition):
    woa_seed = derive_seed(config.master_seed, "woa", task.target_station, repetition)
    woa_config = default_woa_config(
        topology, woa_seed,
        population_size=config.woa.population_size,
        max_iterations=config.woa.max_iterations,
        weight_bound=config.woa.weight_bound,
        spiral_constant_b=config.woa.spiral_constant,
        frozen_l=config.woa.frozen_l,
        frozen_p=config.woa.frozen_p,
    )
    return train_mlp_woa(topology, train_set, woa_config,
                         refinement_epochs=config.woa.refinement_epochs)


def _selection_key(record: RepetitionRecord):
    r2 = record.baseline_testing.r_squared if record.baseline_testing else None
    rmse_value = record.baseline_testing.rmse if record.baseline_testing else None
    return (
        -(r2 if r2 is not None else -math.inf),
        rmse_value if rmse_value is not None else math.inf,
        record.repetition,
    )


def run_task(task: LooTask, frame: StationFrame, config: ExperimentConfig) -> TaskResult:
    """Run the repetition-selection protocol for one target station.

    Each repetition draws its own split, trains the baseline, and is
    scored on the testing phase. The best repetition (highest test R2,
    ties broken by lower test RMSE, then lower repetition index) wins;
    the hybrid is trained on that split, unless hybrid_per_repetition
    asks for a hybrid in every repetition. Repetitions that fail to
    train are recorded and skipped; if all fail the task is marked
    failed and the caller carries on.
    """
    topology = MlpTopology(len(task.reference_stations), config.hidden_units, 1)
    records: list[RepetitionRecord] = []
    baselines: dict[int, TrainedModel] = {}
    hybrids: dict[int, TrainedModel] = {}

    for repetition in range(1, config.repetitions + 1):
        split_seed = derive_seed(config.master_seed, "split", task.target_station, repetition)
        record = RepetitionRecord(task=task.target_station, baseline_id=task.baseline_id,
                                  hybrid_id=task.hybrid_id, repetition=repetition,
                                  split_seed=split_seed)
        try:
            split, normalization, train_set, features, target = _prepare_split(
                frame, task, config, split_seed)
            lm_seed = derive_seed(config.master_seed, "init", task.target_station, repetition)
            baseline = train_mlp_baseline(topology, train_set, lm_seed, epochs=config.lm_epochs)
            baseline.normalization = normalization
            record.baseline_training, record.baseline_testing, _ = _phase_reports(
                baseline, features, target, split)
            baselines[repetition] = baseline
            if config.hybrid_per_repetition:
                hybrid = _train_hybrid(task, config, train_set, topology, repetition)
                hybrid.normalization = normalization
                record.hybrid_training, record.hybrid_testing, _ = _phase_reports(
                    hybrid, features, target, split)
                hybrids[repetition] = hybrid
        except (DataError, ValueError, np.linalg.LinAlgError) as exc:
            record.failed = f"{type(exc).__name__}: {exc}"
        records.append(record)

    candidates = [r for r in records if r.failed is None]
    if not candidates:
        return TaskResult(task=task, records=records, selected=None)

    selected = min(candidates, key=_selection_key)
    selected.selected = True

    split, normalization, train_set, features, target = _prepare_split(
        frame, task, config, selected.split_seed)
    baseline = baselines[selected.repetition]
    _, _, baseline_test_pred = _phase_reports(baseline, features, target, split)

    hybrid = hybrids.get(selected.repetition)
    if hybrid is None:
        hybrid = _train_hybrid(task, config, train_set, topology, selected.repetition)
        hybrid.normalization = normalization
        selected.hybrid_training, selected.hybrid_testing, hybrid_test_pred = _phase_reports(
            hybrid, features, target, split)
    else:
        _, _, hybrid_test_pred = _phase_reports(hybrid, features, target, split)

    return TaskResult(
        task=task,
        records=records,
        selected=selected,
        baseline_model=baseline,
        hybrid_model=hybrid,
        test_observed=target[split.test_indices].copy(),
        baseline_test_predicted=baseline_test_pred,
        hybrid_test_predicted=hybrid_test_pred,
    )


def load_experiment_frame(config: ExperimentConfig) -> StationFrame:
    if config.data_csv:
        return load_csv(config.data_csv)
    return gilan_frame(config.synth.rows,
                       derive_seed(config.master_seed, "synth"),
                       sd_fraction=config.synth.sd_fraction)


def _run_task_star(args):
    return run_task(*args)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """All leave-one-out tasks; `jobs` > 1 runs them in worker processes.

    Scheduling cannot change the outcome because every repetition's
    randomness is derived from the master seed, and results are
    assembled in task order.
    """
    frame = load_experiment_frame(config)
    tasks = build_loo_tasks(frame)
    if jobs <= 1 or len(tasks) == 1:
        results = [run_task(task, frame, config) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_run_task_star, [(task, frame, config) for task in tasks]))
    return ExperimentResult(config=config, frame=frame, tasks=tasks, results=results)


# ---------------------------------------------------------------------------
# Output files


def _report_rows(result: ExperimentResult):
    """(model, phase, MetricReport-or-None) in fixed order: every baseline
    model first, then every hybrid, training before testing."""
    rows = []
    for kind in ("baseline", "hybrid"):
        for task_result in result.results:
            record = task_result.selected
            if kind == "baseline":
                model_id = task_result.task.baseline_id
                training = record.baseline_training if record else None
                testing = record.baseline_testing if record else None
            else:
                model_id = task_result.task.hybrid_id
                training = record.hybrid_training if record else None
                testing = record.hybrid_testing if record else None
            rows.append((model_id, "training", training))
            rows.append((model_id, "testing", testing))
    return rows


def _metric_cell(report: Optional[MetricReport], column: str) -> str:
    if report is None:
        return UNDEFINED
    value = dict(zip(METRIC_COLUMNS, report.column_values()))[column]
    return UNDEFINED if value is None else repr(value)


def write_report_csv(result: ExperimentResult, path) -> None:
    lines = ["model,phase," + ",".join(METRIC_COLUMNS)]
    for model_id, phase, report in _report_rows(result):
        cells = [_metric_cell(report, column) for column in METRIC_COLUMNS]
        lines.append(",".join([model_id, phase, *cells]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_records_jsonl(result: ExperimentResult, path) -> None:
    with Path(path).open("w") as handle:
        for task_result in result.results:
            for record in task_result.records:
                handle.write(json.dumps(record.to_dict(), separators=(",", ":"),
                                        allow_nan=False) + "\n")


def write_manifest(result: ExperimentResult, path) -> None:
    manifest = {
        "config": result.config.to_dict(),
        "versions": {
            "package": _package_version(),
            "numpy": np.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
        "stations": list(result.frame.station_names),
        "rows": result.frame.n_rows,
        "gap_rows": result.frame.gap_rows,
        "tasks": [
            {
                "target": task_result.task.target_station,
                "baseline_id": task_result.task.baseline_id,
                "hybrid_id": task_result.task.hybrid_id,
                "selected_repetition": task_result.selected_repetition,
                "selected_split_seed": (None if task_result.selected is None
                                        else task_result.selected.split_seed),
                "failed": (None if task_result.selected is not None
                           else "every repetition failed"),
            }
            for task_result in result.results
        ],
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")


def emit_plot_data(result: ExperimentResult, outdir) -> list[Path]:
    """Scatter CSVs (testing phase, raw units) per model and one bar CSV
    per metric across models, ready for external plotting."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    for task_result in result.results:
        if task_result.failed:
            continue
        pairs = (
            (task_result.task.baseline_id, task_result.baseline_test_predicted),
            (task_result.task.hybrid_id, task_result.hybrid_test_predicted),
        )
        for model_id, predicted in pairs:
            path = outdir / f"scatter_{model_id}.csv"
            lines = ["observed,predicted"]
            for obs, pred in zip(task_result.test_observed, predicted):
                lines.append(f"{obs!r},{pred!r}")
            path.write_text("\n".join(lines) + "\n")
            written.append(path)

    testing = {(model_id, phase): report
               for model_id, phase, report in _report_rows(result) if phase == "testing"}
    model_ids = [task.baseline_id for task in result.tasks] + [task.hybrid_id for task in result.tasks]
    for column in METRIC_COLUMNS:
        path = outdir / f"bar_{column}.csv"
        lines = ["model,value"]
        for model_id in model_ids:
            lines.append(f"{model_id},{_metric_cell(testing[(model_id, 'testing')], column)}")
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def write_outputs(result: ExperimentResult, outdir) -> dict[str, Path]:
    """report.csv, records.jsonl, manifest.json, and plots/ under outdir."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": outdir / "report.csv",
        "records": outdir / "records.jsonl",
        "manifest": outdir / "manifest.json",
        "plots": outdir / "plots",
    }
    write_report_csv(result, paths["report"])
    write_records_jsonl(result, paths["records"])
    write_manifest(result, paths["manifest"])
    emit_plot_data(result, paths["plots"])
    return paths


def _package_version() -> str:
    from . import __version__
    return __version__
