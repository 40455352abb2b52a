import math

import numpy as np
import pytest

from windwoa.mlp import MlpTopology, SampleSet, flatten, init_params, predict_batch
from windwoa.seeding import make_rng
from windwoa.training import (TRAINER_LMA, TRAINER_WOA, Normalization, TrainedModel,
                              default_woa_config, mlp_fitness, train_mlp_baseline,
                              train_mlp_woa)
from windwoa.woa import Bounds, WoaConfig


def _linear_data(seed, n=80):
    rng = make_rng(seed)
    x = rng.normal(0, 1, (n, 2))
    y = 1.5 * x[:, 0] - 0.5 * x[:, 1]
    return SampleSet(x, y)


class TestMlpFitness:
    def test_exact_params_give_zero(self):
        topo = MlpTopology(2, 3, 1)
        params = make_rng(0).uniform(-1, 1, topo.parameter_count)
        features = make_rng(1).normal(0, 1, (30, 2))
        data = SampleSet(features, predict_batch(topo, params, features))
        assert mlp_fitness(params, topo, data) == 0.0

    def test_zero_network_on_zero_mean_targets(self):
        # fitness of the constant-zero network equals the target spread
        rng = make_rng(2)
        targets = rng.normal(0, 1, 200)
        targets -= targets.mean()
        topo = MlpTopology(1, 2, 1)
        data = SampleSet(rng.normal(0, 1, (200, 1)), targets)
        expected = float(np.sqrt(np.mean(targets ** 2)))  # population sd of zero-mean targets
        assert mlp_fitness(np.zeros(topo.parameter_count), topo, data) == pytest.approx(
            expected, rel=1e-12)
        assert expected == pytest.approx(targets.std(), rel=1e-12)

    def test_overflow_returns_sentinel(self):
        topo = MlpTopology(1, 2, 1)
        params = flatten(np.full((2, 1), 1e308), np.zeros(2),
                         np.full((1, 2), 1e308), np.zeros(1))
        data = SampleSet(np.array([[1.0], [2.0]]), np.array([0.0, 0.0]))
        assert mlp_fitness(params, topo, data) == math.inf


class TestTrainMlpWoa:
    def test_default_config_shape(self):
        topo = MlpTopology(9, 8, 1)
        config = default_woa_config(topo, seed=1)
        assert config.bounds.dimension == 89
        assert config.population_size == 30
        assert config.max_iterations == 50
        assert np.all(config.bounds.lower == -5.0) and np.all(config.bounds.upper == 5.0)

    def test_returns_finite_model_within_bounds(self):
        topo = MlpTopology(2, 3, 1)
        data = _linear_data(3)
        model = train_mlp_woa(topo, data, default_woa_config(topo, seed=4))
        assert model.trainer == TRAINER_WOA
        assert math.isfinite(model.training_rmse)
        assert np.all(np.abs(model.params) <= 5.0)

    def test_reported_rmse_matches_fitness_exactly(self):
        topo = MlpTopology(2, 3, 1)
        data = _linear_data(5)
        model = train_mlp_woa(topo, data, default_woa_config(topo, seed=6))
        assert mlp_fitness(model.params, topo, data) == model.training_rmse

    def test_one_sample_instance_solved(self):
        topo = MlpTopology(1, 1, 1)
        data = SampleSet(np.array([[0.5]]), np.array([0.3]))
        model = train_mlp_woa(topo, data, default_woa_config(topo, seed=7))
        assert model.training_rmse <= 1e-2

    def test_deterministic(self):
        topo = MlpTopology(2, 3, 1)
        data = _linear_data(8)
        config = default_woa_config(topo, seed=9)
        first = train_mlp_woa(topo, data, config)
        second = train_mlp_woa(topo, data, config)
        assert np.array_equal(first.params, second.params)
        assert first.training_rmse == second.training_rmse

    def test_bounds_dimension_mismatch_rejected(self):
        topo = MlpTopology(2, 3, 1)
        config = WoaConfig(bounds=Bounds.cube(5, -5, 5))
        with pytest.raises(ValueError):
            train_mlp_woa(topo, _linear_data(10), config)

    def test_refinement_does_not_hurt(self):
        topo = MlpTopology(2, 3, 1)
        data = _linear_data(11)
        config = default_woa_config(topo, seed=12, max_iterations=10)
        plain = train_mlp_woa(topo, data, config)
        refined = train_mlp_woa(topo, data, config, refinement_epochs=50)
        assert refined.training_rmse <= plain.training_rmse


class TestTrainBaseline:
    def test_convergence_vs_untrained(self):
        topo = MlpTopology(2, 4, 1)
        data = _linear_data(13)
        untrained = mlp_fitness(init_params(topo, 14), topo, data)
        model = train_mlp_baseline(topo, data, seed=14)
        assert model.trainer == TRAINER_LMA
        assert model.training_rmse < 0.1 * untrained
        # least-squares oracle residual on the exactly-linear target is 0
        solution, residuals, *_ = np.linalg.lstsq(
            np.column_stack([data.features, np.ones(len(data))]), data.targets, rcond=None)
        oracle_rmse = float(np.sqrt(residuals[0] / len(data))) if residuals.size else 0.0
        assert model.training_rmse <= oracle_rmse + 0.02 * data.targets.std()

    def test_deterministic(self):
        topo = MlpTopology(2, 3, 1)
        data = _linear_data(15)
        a = train_mlp_baseline(topo, data, seed=16)
        b = train_mlp_baseline(topo, data, seed=16)
        assert np.array_equal(a.params, b.params)

    def test_default_epochs_are_200(self):
        import inspect
        assert inspect.signature(train_mlp_baseline).parameters["epochs"].default == 200


class TestBothTrainersOnSolvableInstance:
    def test_noiseless_instance_below_tolerance(self):
        # data generated exactly by a small tanh network; both trainers
        # must push training RMSE under 0.05 in normalized target units
        rng = make_rng(17)
        topo = MlpTopology(1, 2, 1)
        true_params = flatten(np.array([[1.2], [-0.7]]), np.array([0.1, -0.2]),
                              np.array([[0.8, 0.5]]), np.array([0.05]))
        x = rng.uniform(-2, 2, (60, 1))
        y = predict_batch(topo, true_params, x)
        y = (y - y.mean()) / y.std()
        data = SampleSet((x - x.mean()) / x.std(), y)
        baseline = train_mlp_baseline(topo, data, seed=18)
        hybrid = train_mlp_woa(topo, data, default_woa_config(topo, seed=19))
        assert baseline.training_rmse < 0.05
        assert hybrid.training_rmse < 0.05


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        topo = MlpTopology(3, 4, 1)
        norm = Normalization(feature_means=np.array([1.0, 2.0, 3.0]),
                             feature_stds=np.array([0.5, 1.5, 2.5]),
                             target_mean=4.0, target_std=2.0)
        model = TrainedModel(topology=topo,
                             params=make_rng(20).normal(size=topo.parameter_count),
                             trainer=TRAINER_WOA, training_rmse=0.25,
                             normalization=norm)
        path = tmp_path / "model.json"
        model.save(path)
        loaded = TrainedModel.load(path)
        assert loaded.topology == topo
        assert np.array_equal(loaded.params, model.params)
        assert loaded.trainer == TRAINER_WOA
        assert loaded.training_rmse == 0.25
        assert loaded.normalization.target_std == 2.0
        x = make_rng(21).normal(0, 1, (5, 3)) + np.array([1.0, 2.0, 3.0])
        assert np.allclose(loaded.predict(x), model.predict(x))

    def test_wrong_parameter_count_rejected(self, tmp_path):
        topo = MlpTopology(2, 2, 1)
        model = TrainedModel(topology=topo, params=np.zeros(topo.parameter_count),
                             trainer=TRAINER_LMA, training_rmse=0.0)
        payload = model.to_dict()
        payload["params"] = payload["params"][:-1]
        with pytest.raises(ValueError):
            TrainedModel.from_dict(payload)

    def test_unknown_trainer_rejected(self):
        topo = MlpTopology(2, 2, 1)
        model = TrainedModel(topology=topo, params=np.zeros(topo.parameter_count),
                             trainer=TRAINER_LMA, training_rmse=0.0)
        payload = model.to_dict()
        payload["trainer"] = "SGD"
        with pytest.raises(ValueError):
            TrainedModel.from_dict(payload)

    def test_predict_without_normalization_uses_raw_units(self):
        topo = MlpTopology(1, 1, 1)
        params = flatten(np.array([[0.0]]), np.array([0.0]), np.array([[1.0]]), np.array([0.75]))
        model = TrainedModel(topology=topo, params=params, trainer=TRAINER_LMA,
                             training_rmse=0.0)
        assert model.predict(np.array([[1.0]]))[0] == pytest.approx(0.75)
