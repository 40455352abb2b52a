"""Two trainers behind one interface: a damped least-squares baseline
and whale-search weight selection over the flattened parameter space."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .mlp import MlpTopology, SampleSet, init_params, lm_train, predict_batch
from .woa import Bounds, WoaConfig, woa_optimize

TRAINER_LMA = "MLP_LMA"
TRAINER_WOA = "MLP_WOA"


@dataclass(frozen=True)
class Normalization:
    """Affine constants mapping raw features/targets to training units."""

    feature_means: np.ndarray
    feature_stds: np.ndarray
    target_mean: float
    target_std: float

    def normalize_features(self, features) -> np.ndarray:
        return (np.asarray(features, dtype=float) - self.feature_means) / self.feature_stds

    def normalize_targets(self, targets) -> np.ndarray:
        return (np.asarray(targets, dtype=float) - self.target_mean) / self.target_std

    def denormalize_targets(self, targets) -> np.ndarray:
        return np.asarray(targets, dtype=float) * self.target_std + self.target_mean


@dataclass
class TrainedModel:
    topology: MlpTopology
    params: np.ndarray
    trainer: str
    training_rmse: float
    normalization: Optional[Normalization] = None
    early_stopped: bool = False

    def predict(self, features) -> np.ndarray:
        """Predictions in raw units when normalization constants are attached,
        otherwise in the units the model was trained in."""
        x = np.asarray(features, dtype=float)
        if self.normalization is not None:
            x = self.normalization.normalize_features(x)
        out = predict_batch(self.topology, self.params, x)
        if self.normalization is not None:
            out = self.normalization.denormalize_targets(out)
        return out

    def to_dict(self) -> dict:
        norm = None
        if self.normalization is not None:
            norm = {
                "feature_means": list(map(float, self.normalization.feature_means)),
                "feature_stds": list(map(float, self.normalization.feature_stds)),
                "target_mean": self.normalization.target_mean,
                "target_std": self.normalization.target_std,
            }
        return {
            "trainer": self.trainer,
            "topology": {
                "n_inputs": self.topology.n_inputs,
                "n_hidden": self.topology.n_hidden,
                "n_outputs": self.topology.n_outputs,
                "hidden_activation": self.topology.hidden_activation,
                "output_activation": self.topology.output_activation,
            },
            "params": list(map(float, self.params)),
            "training_rmse": self.training_rmse,
            "normalization": norm,
            "early_stopped": self.early_stopped,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainedModel":
        if payload.get("trainer") not in (TRAINER_LMA, TRAINER_WOA):
            raise ValueError(f"unknown trainer tag: {payload.get('trainer')!r}")
        topo = payload["topology"]
        topology = MlpTopology(
            n_inputs=int(topo["n_inputs"]),
            n_hidden=int(topo["n_hidden"]),
            n_outputs=int(topo["n_outputs"]),
            hidden_activation=topo.get("hidden_activation", "tanh"),
            output_activation=topo.get("output_activation", "linear"),
        )
        params = np.asarray(payload["params"], dtype=float)
        if params.shape != (topology.parameter_count,):
            raise ValueError(
                f"parameter array has length {params.size}, topology needs {topology.parameter_count}"
            )
        norm = None
        if payload.get("normalization") is not None:
            raw = payload["normalization"]
            norm = Normalization(
                feature_means=np.asarray(raw["feature_means"], dtype=float),
                feature_stds=np.asarray(raw["feature_stds"], dtype=float),
                target_mean=float(raw["target_mean"]),
                target_std=float(raw["target_std"]),
            )
        return cls(
            topology=topology,
            params=params,
            trainer=payload["trainer"],
            training_rmse=float(payload["training_rmse"]),
            normalization=norm,
            early_stopped=bool(payload.get("early_stopped", False)),
        )

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def mlp_fitness(params, topology: MlpTopology, train_set: SampleSet) -> float:
    """Training RMSE of the network at `params`; +inf when predictions blow up."""
    with np.errstate(over="ignore", invalid="ignore"):
        predictions = predict_batch(topology, params, train_set.features)
        if not np.all(np.isfinite(predictions)):
            return math.inf
        diff = predictions - train_set.targets
        value = float(np.sqrt(np.mean(diff * diff)))
    return value if math.isfinite(value) else math.inf


def default_woa_config(topology: MlpTopology, seed: int,
                       population_size: int = 30, max_iterations: int = 50,
                       weight_bound: float = 5.0, spiral_constant_b: float = 1.0,
                       frozen_l: Optional[float] = None,
                       frozen_p: Optional[float] = None) -> WoaConfig:
    """Whale-search settings sized to the network's flat parameter vector."""
    bounds = Bounds.cube(topology.parameter_count, -weight_bound, weight_bound)
    return WoaConfig(bounds=bounds, population_size=population_size,
                     max_iterations=max_iterations, seed=seed,
                     spiral_constant_b=spiral_constant_b,
                     frozen_l=frozen_l, frozen_p=frozen_p)


def train_mlp_woa(topology: MlpTopology, train_set: SampleSet, woa_config: WoaConfig,
                  refinement_epochs: int = 0) -> TrainedModel:
    """Select weights by whale search, minimizing training RMSE.

    refinement_epochs > 0 appends a damped least-squares polish from the
    returned weights; it defaults to off, which is the plain hybrid.
    """
    if woa_config.bounds.dimension != topology.parameter_count:
        raise ValueError(
            f"bounds dimension {woa_config.bounds.dimension} does not match "
            f"the {topology.parameter_count}-parameter network"
        )
    if train_set.features.shape[1] != topology.n_inputs:
        raise ValueError("train_set feature width does not match the topology")
    result = woa_optimize(woa_config, lambda vector: mlp_fitness(vector, topology, train_set))
    params, training_rmse = result.best_position, result.best_fitness
    if refinement_epochs > 0:
        params, history = lm_train(topology, params, train_set, epochs=refinement_epochs)
        training_rmse = history[-1]
    return TrainedModel(topology=topology, params=params, trainer=TRAINER_WOA,
                        training_rmse=float(training_rmse))


def train_mlp_baseline(topology: MlpTopology, train_set: SampleSet, seed: int,
                       epochs: int = 200, damping_init: float = 1e-3) -> TrainedModel:
    """Random initialization followed by damped least-squares training."""
    if train_set.features.shape[1] != topology.n_inputs:
        raise ValueError("train_set feature width does not match the topology")
    initial = init_params(topology, seed)
    params, history = lm_train(topology, initial, train_set,
                               epochs=epochs, damping_init=damping_init)
    return TrainedModel(topology=topology, params=params, trainer=TRAINER_LMA,
                        training_rmse=float(history[-1]),
                        early_stopped=len(history) < epochs + 1)
