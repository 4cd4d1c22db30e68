"""From-scratch fully connected softmax classifier (float64, numpy).

The network is the approximating half of the two-path comparison: trained
on sampled data by cross-entropy minimization, its softmax output is read
as a predicted category posterior and compared against the exact one.

Training inputs are standardized per dimension; the constants live in the
model so predictions take raw coordinates and ground-truth comparisons
happen in the original units.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mixtures import LabeledDataset
from .rng import stream

ACTIVATIONS = ("softplus", "relu", "tanh")
OPTIMIZERS = ("adam", "momentum", "sgd")

_INIT_STREAM = 0x696E6974
_SHUFFLE_STREAM = 0x73687566

CHECKPOINT_FORMAT_VERSION = 1


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"training diverged (non-finite loss) at epoch {epoch}")


@dataclass(frozen=True)
class MLPConfig:
    input_dim: int
    hidden_layers: tuple = (64, 64)
    num_categories: int = 2
    activation: str = "softplus"
    learning_rate: float = 1e-3
    batch_size: int = 128
    epochs: int = 30
    seed: int = 0
    optimizer: str = "adam"

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(w) for w in self.hidden_layers))
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if any(w < 1 for w in self.hidden_layers):
            raise ValueError(f"hidden widths must be >= 1, got {self.hidden_layers}")
        if self.num_categories < 2:
            raise ValueError(f"num_categories must be >= 2, got {self.num_categories}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; choose from {ACTIVATIONS}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}; choose from {OPTIMIZERS}")
        if not (self.learning_rate > 0):
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {self.epochs}")

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_layers": list(self.hidden_layers),
            "num_categories": self.num_categories,
            "activation": self.activation,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
            "optimizer": self.optimizer,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MLPConfig":
        return cls(**{k: (tuple(v) if k == "hidden_layers" else v) for k, v in doc.items()})


@dataclass(frozen=True, eq=False)
class MLPModel:
    """Trained parameters plus the input standardization constants."""

    config: MLPConfig
    weights: tuple  # per layer, shape (fan_in, fan_out)
    biases: tuple  # per layer, shape (fan_out,)
    input_mean: np.ndarray
    input_std: np.ndarray

    def __post_init__(self):
        dims = [self.config.input_dim, *self.config.hidden_layers, self.config.num_categories]
        if len(self.weights) != len(dims) - 1 or len(self.biases) != len(dims) - 1:
            raise ValueError("layer count does not match config")
        frozen_w, frozen_b = [], []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            w = np.asarray(w, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if w.shape != (dims[i], dims[i + 1]) or b.shape != (dims[i + 1],):
                raise ValueError(
                    f"layer {i} shapes {w.shape}/{b.shape} do not chain "
                    f"{dims[i]} -> {dims[i + 1]}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i} parameters must be finite")
            w, b = w.copy(), b.copy()
            w.flags.writeable = False
            b.flags.writeable = False
            frozen_w.append(w)
            frozen_b.append(b)
        mean = np.asarray(self.input_mean, dtype=np.float64).copy()
        std = np.asarray(self.input_std, dtype=np.float64).copy()
        if mean.shape != (self.config.input_dim,) or std.shape != (self.config.input_dim,):
            raise ValueError("standardization constants must match input_dim")
        mean.flags.writeable = False
        std.flags.writeable = False
        object.__setattr__(self, "weights", tuple(frozen_w))
        object.__setattr__(self, "biases", tuple(frozen_b))
        object.__setattr__(self, "input_mean", mean)
        object.__setattr__(self, "input_std", std)


@dataclass(frozen=True)
class TrainReport:
    epoch_losses: tuple
    final_loss: float
    wall_time_s: float
    seed: int
    note: str = ""


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return np.logaddexp(0.0, z)  # softplus


def _activate_prime(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0).astype(np.float64)
    if name == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return 0.5 * (np.tanh(0.5 * z) + 1.0)  # sigmoid, overflow-free


def init_model(config: MLPConfig) -> MLPModel:
    """Fan-in-scaled uniform initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    gen = stream(config.seed, _INIT_STREAM)
    dims = [config.input_dim, *config.hidden_layers, config.num_categories]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        lim = 1.0 / np.sqrt(fan_in)
        weights.append((gen.random((fan_in, fan_out)) * 2.0 - 1.0) * lim)
        biases.append((gen.random(fan_out) * 2.0 - 1.0) * lim)
    return MLPModel(
        config=config,
        weights=tuple(weights),
        biases=tuple(biases),
        input_mean=np.zeros(config.input_dim),
        input_std=np.ones(config.input_dim),
    )


def _standardize(model: MLPModel, X: np.ndarray) -> np.ndarray:
    return (X - model.input_mean) / model.input_std


def _logits_core(weights, biases, act: str, h: np.ndarray) -> np.ndarray:
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        h = h @ w + b
        if i != last:
            h = _activate(act, h)
    return h


def _logits(model: MLPModel, X: np.ndarray) -> np.ndarray:
    return _logits_core(
        model.weights, model.biases, model.config.activation, _standardize(model, X)
    )


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def forward_batch(model: MLPModel, X: np.ndarray) -> np.ndarray:
    """Predicted posteriors for raw inputs ``X`` of shape (n, input_dim)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.config.input_dim:
        raise ValueError(
            f"expected inputs of shape (n, {model.config.input_dim}), got {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("inputs must be finite")
    return _softmax(_logits(model, X))


def forward(model: MLPModel, x) -> np.ndarray:
    """Predicted posterior for one raw input vector; sums to 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.config.input_dim,):
        raise ValueError(f"expected an input of shape ({model.config.input_dim},), got {x.shape}")
    return forward_batch(model, x[None, :])[0]


def predict_posterior(model: MLPModel, x) -> np.ndarray:
    """Alias of :func:`forward`: the network's estimate of the true posterior."""
    return forward(model, x)


def _check_batch(model: MLPModel, data: LabeledDataset):
    if len(data) == 0:
        raise ValueError("batch must be nonempty")
    if data.dim != model.config.input_dim:
        raise ValueError(f"data dim {data.dim} != model input_dim {model.config.input_dim}")
    if int(data.ys.max()) >= model.config.num_categories:
        raise ValueError("label out of range for model categories")
    return data.xs, data.ys


def loss(model: MLPModel, data: LabeledDataset) -> float:
    """Mean cross-entropy -log q(y_i | x_i) over the batch."""
    X, y = _check_batch(model, data)
    return _loss_arrays(model, X, y)


def _loss_arrays(model: MLPModel, X: np.ndarray, y: np.ndarray) -> float:
    logp = _log_softmax(_logits(model, X))
    return float(-logp[np.arange(len(y)), y].mean())


def gradient(model: MLPModel, data: LabeledDataset):
    """Exact gradients of :func:`loss`, as (weight_grads, bias_grads) lists."""
    X, y = _check_batch(model, data)
    grads_w, grads_b, _ = _grad_core(
        model.weights, model.biases, model.config.activation, _standardize(model, X), y
    )
    return grads_w, grads_b


def _grad_core(weights, biases, act: str, X: np.ndarray, y: np.ndarray):
    """Backpropagation; also returns the batch loss from the same pass."""
    n = len(y)
    pre_acts = []
    outs = [X]
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = outs[-1] @ w + b
        pre_acts.append(z)
        outs.append(_activate(act, z) if i != last else z)
    logp = _log_softmax(outs[-1])
    batch_loss = float(-logp[np.arange(n), y].mean())
    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    for i in range(last, -1, -1):
        grads_w[i] = outs[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * _activate_prime(act, pre_acts[i - 1])
    return grads_w, grads_b, batch_loss


class _Optimizer:
    def __init__(self, config: MLPConfig, shapes):
        self.kind = config.optimizer
        self.lr = config.learning_rate
        self.t = 0
        if self.kind in ("momentum", "adam"):
            self.m = [np.zeros(s) for s in shapes]
        if self.kind == "adam":
            self.v = [np.zeros(s) for s in shapes]

    def step(self, params, grads):
        self.t += 1
        if self.kind == "sgd":
            return [p - self.lr * g for p, g in zip(params, grads)]
        if self.kind == "momentum":
            self.m = [0.9 * m + g for m, g in zip(self.m, grads)]
            return [p - self.lr * m for p, m in zip(params, self.m)]
        b1, b2, eps = 0.9, 0.999, 1e-8
        self.m = [b1 * m + (1 - b1) * g for m, g in zip(self.m, grads)]
        self.v = [b2 * v + (1 - b2) * g * g for v, g in zip(self.v, grads)]
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        return [
            p - self.lr * (m / c1) / (np.sqrt(v / c2) + eps)
            for p, m, v in zip(params, self.m, self.v)
        ]


def train(config: MLPConfig, data: LabeledDataset) -> tuple[MLPModel, TrainReport]:
    """Minibatch cross-entropy training, deterministic in (config, data).

    Per-epoch reshuffling and initialization draw from separate streams
    keyed by ``config.seed``.  Raises :class:`TrainingDivergedError` if the
    mean epoch loss stops being finite.
    """
    if len(data) == 0:
        raise ValueError("training data must be nonempty")
    if data.dim != config.input_dim:
        raise ValueError(f"data dim {data.dim} != config input_dim {config.input_dim}")
    if int(data.ys.max()) >= config.num_categories:
        raise ValueError("label out of range for config num_categories")

    t0 = time.monotonic()
    mean = data.xs.mean(axis=0)
    std = data.xs.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    X = (data.xs - mean) / std
    y = data.ys

    seed_model = init_model(config)
    # Optimize raw parameter lists; the standardization is baked into X here
    # and stored on the final model for raw-coordinate prediction.
    params = [a.copy() for a in (*seed_model.weights, *seed_model.biases)]
    n_layers = len(seed_model.weights)

    shuffle_gen = stream(config.seed, _SHUFFLE_STREAM)
    opt = _Optimizer(config, [p.shape for p in params])
    n = len(data)
    act = config.activation
    epoch_losses = []
    for epoch in range(config.epochs):
        perm = shuffle_gen.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            gw, gb, batch_loss = _grad_core(
                params[:n_layers], params[n_layers:], act, X[idx], y[idx]
            )
            total += batch_loss * len(idx)
            params = opt.step(params, gw + gb)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch)
        epoch_losses.append(epoch_loss)

    final_model = MLPModel(
        config=config,
        weights=tuple(params[:n_layers]),
        biases=tuple(params[n_layers:]),
        input_mean=mean,
        input_std=std,
    )
    wall = time.monotonic() - t0
    if epoch_losses:
        decreased = epoch_losses[-1] <= epoch_losses[0]
        note = "loss decreased over training" if decreased else "loss did not decrease"
        final_loss = epoch_losses[-1]
    else:
        note = "no training epochs requested"
        final_loss = float("nan")
    report = TrainReport(
        epoch_losses=tuple(epoch_losses),
        final_loss=final_loss,
        wall_time_s=wall,
        seed=config.seed,
        note=note,
    )
    return final_model, report


# ---------------------------------------------------------------------------
# Serialization


def model_to_json(model: MLPModel) -> dict:
    return {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "standardization": {
            "mean": model.input_mean.tolist(),
            "std": model.input_std.tolist(),
        },
        "layers": [
            {"weights": w.tolist(), "bias": b.tolist()}
            for w, b in zip(model.weights, model.biases)
        ],
    }


def model_from_json(doc: dict) -> MLPModel:
    version = doc.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format_version: {version!r}")
    config = MLPConfig.from_dict(doc["config"])
    return MLPModel(
        config=config,
        weights=tuple(np.array(layer["weights"]) for layer in doc["layers"]),
        biases=tuple(np.array(layer["bias"]) for layer in doc["layers"]),
        input_mean=np.array(doc["standardization"]["mean"]),
        input_std=np.array(doc["standardization"]["std"]),
    )


def save_checkpoint(model: MLPModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_json(model), indent=2, sort_keys=True) + "\n")


def load_checkpoint(path) -> MLPModel:
    return model_from_json(json.loads(Path(path).read_text()))


def report_to_csv(report: TrainReport, path) -> None:
    """Epoch series plus run constants; wall time stays out of the file so
    reruns with one seed are byte-identical."""
    lines = ["epoch,mean_loss,final_loss,seed"]
    for i, ls in enumerate(report.epoch_losses):
        lines.append(f"{i},{repr(float(ls))},{repr(float(report.final_loss))},{report.seed}")
    Path(path).write_text("\n".join(lines) + "\n")
