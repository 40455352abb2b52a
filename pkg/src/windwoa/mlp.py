"""Compact feed-forward network: one tanh hidden layer, linear output.

All weights and biases live in a single flat vector so a derivative-free
optimizer can treat the whole network as a box-bounded search space.
The flat layout is fixed: input-to-hidden weights row-major by hidden
unit, hidden biases, hidden-to-output weights row-major by output unit,
output biases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import make_rng


@dataclass(frozen=True)
class MlpTopology:
    n_inputs: int
    n_hidden: int
    n_outputs: int = 1
    hidden_activation: str = "tanh"
    output_activation: str = "linear"

    def __post_init__(self):
        if min(self.n_inputs, self.n_hidden, self.n_outputs) < 1:
            raise ValueError("layer sizes must be positive")
        if self.hidden_activation != "tanh":
            raise ValueError("only tanh hidden units are supported")
        if self.output_activation != "linear":
            raise ValueError("only linear output units are supported")

    @property
    def parameter_count(self) -> int:
        return (self.n_inputs * self.n_hidden + self.n_hidden
                + self.n_hidden * self.n_outputs + self.n_outputs)


@dataclass(frozen=True)
class SampleSet:
    """Feature matrix (n_samples, n_inputs) with one target per row."""

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)
        if features.ndim != 2 or targets.ndim != 1:
            raise ValueError("features must be 2-d and targets 1-d")
        if features.shape[0] != targets.shape[0]:
            raise ValueError("features and targets disagree on the sample count")
        if features.shape[0] == 0:
            raise ValueError("sample set must not be empty")
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(targets))):
            raise ValueError("samples must be finite")

    def __len__(self) -> int:
        return self.features.shape[0]


def unflatten(topology: MlpTopology, params) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split a flat parameter vector into (w1, b1, w2, b2)."""
    params = np.asarray(params, dtype=float)
    expected = topology.parameter_count
    if params.shape != (expected,):
        raise ValueError(f"expected a flat vector of {expected} parameters, got shape {params.shape}")
    ni, nh, no = topology.n_inputs, topology.n_hidden, topology.n_outputs
    offset = nh * ni
    w1 = params[:offset].reshape(nh, ni)
    b1 = params[offset:offset + nh]
    offset += nh
    w2 = params[offset:offset + no * nh].reshape(no, nh)
    offset += no * nh
    b2 = params[offset:]
    return w1, b1, w2, b2


def flatten(w1, b1, w2, b2) -> np.ndarray:
    """Inverse of unflatten; validates that the pieces fit together."""
    w1 = np.asarray(w1, dtype=float)
    b1 = np.asarray(b1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if w1.ndim != 2 or w2.ndim != 2 or b1.ndim != 1 or b2.ndim != 1:
        raise ValueError("w1/w2 must be matrices and b1/b2 vectors")
    if b1.size != w1.shape[0] or w2.shape[1] != w1.shape[0] or b2.size != w2.shape[0]:
        raise ValueError("weight and bias shapes are inconsistent")
    return np.concatenate([w1.ravel(), b1, w2.ravel(), b2])


def forward(topology: MlpTopology, params, features) -> np.ndarray:
    """Single forward pass; returns the output vector (length n_outputs)."""
    w1, b1, w2, b2 = unflatten(topology, params)
    x = np.asarray(features, dtype=float)
    if x.shape != (topology.n_inputs,):
        raise ValueError(f"expected {topology.n_inputs} features, got shape {x.shape}")
    hidden = np.tanh(w1 @ x + b1)
    return w2 @ hidden + b2


def predict_batch(topology: MlpTopology, params, features_matrix) -> np.ndarray:
    """Row-wise forward pass. Returns a vector for single-output networks,
    otherwise an (n_rows, n_outputs) matrix."""
    w1, b1, w2, b2 = unflatten(topology, params)
    x = np.asarray(features_matrix, dtype=float)
    if x.ndim != 2:
        raise ValueError("features_matrix must be 2-d")
    if x.shape[0] > 0 and x.shape[1] != topology.n_inputs:
        raise ValueError(f"expected {topology.n_inputs} feature columns, got {x.shape[1]}")
    if x.shape[0] == 0:
        return np.empty(0) if topology.n_outputs == 1 else np.empty((0, topology.n_outputs))
    hidden = np.tanh(x @ w1.T + b1)
    out = hidden @ w2.T + b2
    return out[:, 0] if topology.n_outputs == 1 else out


def init_params(topology: MlpTopology, seed: int) -> np.ndarray:
    """Uniform weights in [-0.5, 0.5], zero biases, reproducible per seed."""
    rng = make_rng(seed)
    w1 = rng.uniform(-0.5, 0.5, (topology.n_hidden, topology.n_inputs))
    w2 = rng.uniform(-0.5, 0.5, (topology.n_outputs, topology.n_hidden))
    return flatten(w1, np.zeros(topology.n_hidden), w2, np.zeros(topology.n_outputs))


def residual_jacobian(topology: MlpTopology, params, data: SampleSet) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample residuals (prediction - target) and their exact Jacobian.

    Column order matches the flat parameter layout. Single-output
    networks only.
    """
    if topology.n_outputs != 1:
        raise ValueError("residual_jacobian is defined for single-output networks")
    w1, b1, w2, b2 = unflatten(topology, params)
    x = data.features
    hidden = np.tanh(x @ w1.T + b1)                      # (n, nh)
    predictions = hidden @ w2[0] + b2[0]
    residuals = predictions - data.targets
    gate = (1.0 - hidden * hidden) * w2[0]               # d(prediction)/d(pre-activation)
    jac_w1 = gate[:, :, None] * x[:, None, :]            # (n, nh, ni)
    n = x.shape[0]
    jacobian = np.concatenate(
        [jac_w1.reshape(n, -1), gate, hidden, np.ones((n, 1))], axis=1
    )
    return jacobian, residuals


def lm_train(topology: MlpTopology, initial, data: SampleSet,
             epochs: int = 200, damping_init: float = 1e-3,
             max_solve_retries: int = 10) -> tuple[np.ndarray, list[float]]:
    """Levenberg-Marquardt on the sum of squared residuals.

    One proposed update per epoch: a step that lowers the SSE is
    accepted and divides the damping by 10; a rejected step multiplies
    it by 10 and leaves the parameters untouched. When the damped
    normal equations cannot be solved even after max_solve_retries
    damping increases, training stops early with the incumbent.

    Returns (best parameters, rmse history); history[0] is the RMSE at
    initialization and history[e] the RMSE of the held parameters after
    epoch e, so the history is non-increasing.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if topology.n_outputs != 1:
        raise ValueError("lm_train is defined for single-output networks")
    params = np.array(initial, dtype=float)
    if params.shape != (topology.parameter_count,):
        raise ValueError("initial parameter vector has the wrong length")

    n = len(data)
    identity = np.eye(topology.parameter_count)
    lam = float(damping_init)

    jacobian, residuals = residual_jacobian(topology, params, data)
    sse = float(residuals @ residuals)
    hessian = jacobian.T @ jacobian
    gradient = jacobian.T @ residuals
    history = [float(np.sqrt(sse / n))]

    for _ in range(epochs):
        step = None
        retries = 0
        while step is None:
            try:
                candidate_step = np.linalg.solve(hessian + lam * identity, gradient)
            except np.linalg.LinAlgError:
                candidate_step = None
            if candidate_step is None or not np.all(np.isfinite(candidate_step)):
                lam *= 10.0
                retries += 1
                if retries > max_solve_retries:
                    return params, history
            else:
                step = candidate_step

        candidate = params - step
        candidate_residuals = predict_batch(topology, candidate, data.features) - data.targets
        candidate_sse = float(candidate_residuals @ candidate_residuals)
        if np.isfinite(candidate_sse) and candidate_sse < sse:
            params = candidate
            sse = candidate_sse
            lam /= 10.0
            jacobian, residuals = residual_jacobian(topology, params, data)
            hessian = jacobian.T @ jacobian
            gradient = jacobian.T @ residuals
        else:
            lam *= 10.0
        history.append(float(np.sqrt(sse / n)))

    return params, history
