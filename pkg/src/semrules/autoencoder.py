"""Dense denoising autoencoder with a per-group softmax output head.

Everything is explicit numpy: forward pass, analytic backpropagation
through the softmax+BCE head and tanh hidden layers, and Adam with L2
weight decay added to the gradient (classical coupled decay, not
decoupled).  Training is single-threaded and bit-reproducible under a
fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from semrules.transactions import FeatureRegistry, TransactionSet

EPS = 1e-7  # probability clamp before logs

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class ModelError(ValueError):
    """Raised for invalid architectures, width mismatches, or bad model files."""


class TrainingDiverged(RuntimeError):
    """Raised when the loss turns non-finite; carries epoch/batch diagnostics."""

    def __init__(self, epoch: int, batch: int, loss: float):
        super().__init__(f"non-finite loss {loss} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch
        self.loss = loss


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-3
    epochs: int = 20
    weight_decay: float = 2e-8
    noise_factor: float = 0.5
    batch_size: int = 64
    seed: int = 0
    hidden_dims: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ModelError(f"learning rate must be >= 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ModelError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ModelError(f"batch size must be >= 1, got {self.batch_size}")
        if self.noise_factor < 0:
            raise ModelError(f"noise factor must be >= 0, got {self.noise_factor}")


@dataclass
class Layer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str  # "tanh" | "group_softmax"


def default_hidden_dims(input_width: int) -> tuple[int, ...]:
    """Two-layer encoder: ceil(w/2) then ceil(w/4), floored at 2 units."""
    return (max(2, math.ceil(input_width / 2)), max(2, math.ceil(input_width / 4)))


@dataclass
class AutoencoderModel:
    """Under-complete encoder/decoder stack tied to a feature registry."""

    layers: list[Layer]
    registry: FeatureRegistry
    hidden_dims: tuple[int, ...]
    seed: int
    config: TrainConfig | None = None
    loss_trace: list[float] = field(default_factory=list)

    @property
    def input_width(self) -> int:
        return self.layers[0].weights.shape[1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.input_width,):
            raise ModelError(f"input width {x.shape} does not match model width {self.input_width}")
        return self.forward_batch(x[None, :])[0]

    def forward_batch(self, batch: np.ndarray) -> np.ndarray:
        activations = _forward_pass(self, batch)
        return activations[-1]


def build_model(
    registry: FeatureRegistry,
    hidden_dims: Sequence[int] | None = None,
    seed: int = 0,
) -> AutoencoderModel:
    """Construct an untrained model; hidden widths must stay below the input width."""
    width = registry.width
    hidden = tuple(hidden_dims) if hidden_dims is not None else default_hidden_dims(width)
    if not hidden:
        raise ModelError("need at least one hidden layer")
    bad = [h for h in hidden if h >= width or h < 1]
    if bad:
        raise ModelError(f"hidden widths {bad} violate under-completeness for input width {width}")

    dims = [width, *hidden, *hidden[-2::-1], width]
    rng = np.random.default_rng(seed)
    layers: list[Layer] = []
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        bound = 1.0 / math.sqrt(fan_in)
        weights = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        bias = np.zeros(fan_out)
        activation = "group_softmax" if i == len(dims) - 2 else "tanh"
        layers.append(Layer(weights=weights, bias=bias, activation=activation))
    return AutoencoderModel(layers=layers, registry=registry, hidden_dims=hidden, seed=seed)


def _group_softmax(z: np.ndarray, registry: FeatureRegistry) -> np.ndarray:
    out = np.empty_like(z)
    for sl in registry.slices():
        block = z[:, sl]
        block = block - block.max(axis=1, keepdims=True)
        e = np.exp(block)
        out[:, sl] = e / e.sum(axis=1, keepdims=True)
    return out


def _forward_pass(model: AutoencoderModel, batch: np.ndarray) -> list[np.ndarray]:
    """Activations per layer, input first, output last."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.input_width:
        raise ModelError(f"batch shape {batch.shape} does not match model width {model.input_width}")
    activations = [batch]
    a = batch
    for layer in model.layers:
        z = a @ layer.weights.T + layer.bias
        a = np.tanh(z) if layer.activation == "tanh" else _group_softmax(z, model.registry)
        activations.append(a)
    return activations


def forward(model: AutoencoderModel, x: np.ndarray) -> np.ndarray:
    return model.forward(x)


def loss(output: np.ndarray, clean_target: np.ndarray) -> float:
    """Mean binary cross entropy over all components vs the noise-free target."""
    output = np.asarray(output, dtype=np.float64)
    target = np.asarray(clean_target, dtype=np.float64)
    if output.shape != target.shape:
        raise ModelError(f"output shape {output.shape} != target shape {target.shape}")
    p = np.clip(output, EPS, 1.0 - EPS)
    return float(np.mean(-(target * np.log(p) + (1.0 - target) * np.log(1.0 - p))))


def backward(
    model: AutoencoderModel,
    batch: np.ndarray,
    clean_target: np.ndarray,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Gradients of the mean BCE loss w.r.t. every (weights, bias), input->output order.

    Pure reconstruction loss only; weight decay is added at update time.
    """
    batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    target = np.atleast_2d(np.asarray(clean_target, dtype=np.float64))
    activations = _forward_pass(model, batch)
    n_rows, width = batch.shape

    p = activations[-1]
    p_safe = np.clip(p, EPS, 1.0 - EPS)
    # dL/dp for L = mean over all components and rows
    g = (-(target / p_safe) + (1.0 - target) / (1.0 - p_safe)) / (width * n_rows)
    # softmax jacobian per group: dL/dz_i = p_i * (g_i - sum_g(g*p))
    delta = np.empty_like(p)
    for sl in model.registry.slices():
        s = (g[:, sl] * p[:, sl]).sum(axis=1, keepdims=True)
        delta[:, sl] = p[:, sl] * (g[:, sl] - s)

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(model.layers)  # type: ignore[list-item]
    for idx in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[idx]
        a_prev = activations[idx]
        grads[idx] = (delta.T @ a_prev, delta.sum(axis=0))
        if idx > 0:
            upstream = delta @ layer.weights
            a = activations[idx]
            delta = upstream * (1.0 - a * a)
    return grads


def decay_gradient(param: np.ndarray, weight_decay: float) -> np.ndarray:
    """L2 term added to the reconstruction gradient: decay * w (coupled Adam)."""
    return weight_decay * param


def train(transactions: TransactionSet, config: TrainConfig) -> AutoencoderModel:
    """Denoising training loop: corrupt batch, forward, BCE vs clean rows, Adam step.

    Returns the model with its per-epoch mean loss trace attached.
    Batch corruption applies the same additive-Gaussian-then-clamp rule
    as :func:`semrules.transactions.corrupt`, drawn in one batched call.
    """
    if len(transactions) < 1:
        raise ModelError("need at least one transaction to train")
    model = build_model(transactions.registry, config.hidden_dims, seed=config.seed)
    model.config = config

    data = transactions.matrix
    n = data.shape[0]
    rng = np.random.default_rng(config.seed)
    adam_m = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in model.layers]
    adam_v = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in model.layers]
    step = 0

    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for batch_no, start in enumerate(range(0, n, config.batch_size)):
            clean = data[perm[start : start + config.batch_size]]
            if config.noise_factor > 0:
                noisy = np.clip(clean + config.noise_factor * rng.standard_normal(clean.shape), 0.0, 1.0)
            else:
                noisy = clean
            output = _forward_pass(model, noisy)[-1]
            batch_loss = loss(output, clean)
            if not math.isfinite(batch_loss):
                raise TrainingDiverged(epoch, batch_no, batch_loss)
            epoch_loss += batch_loss * clean.shape[0]

            grads = backward(model, noisy, clean)
            step += 1
            bias_c1 = 1.0 - ADAM_BETA1**step
            bias_c2 = 1.0 - ADAM_BETA2**step
            for layer, (g_w, g_b), m_pair, v_pair in zip(model.layers, grads, adam_m, adam_v):
                for param, grad, m, v in (
                    (layer.weights, g_w, m_pair[0], v_pair[0]),
                    (layer.bias, g_b, m_pair[1], v_pair[1]),
                ):
                    if config.weight_decay:
                        grad = grad + decay_gradient(param, config.weight_decay)
                    m[:] = ADAM_BETA1 * m + (1.0 - ADAM_BETA1) * grad
                    v[:] = ADAM_BETA2 * v + (1.0 - ADAM_BETA2) * grad * grad
                    param -= config.learning_rate * (m / bias_c1) / (np.sqrt(v / bias_c2) + ADAM_EPS)
        model.loss_trace.append(epoch_loss / n)
    return model


def save_model(model: AutoencoderModel, path: str | Path) -> None:
    payload = {
        "format": "semrules-autoencoder",
        "version": 1,
        "registry_hash": model.registry.content_hash(),
        "input_width": model.input_width,
        "hidden_dims": list(model.hidden_dims),
        "seed": model.seed,
        "train_config": None
        if model.config is None
        else {
            "learning_rate": model.config.learning_rate,
            "epochs": model.config.epochs,
            "weight_decay": model.config.weight_decay,
            "noise_factor": model.config.noise_factor,
            "batch_size": model.config.batch_size,
            "seed": model.config.seed,
            "hidden_dims": None if model.config.hidden_dims is None else list(model.config.hidden_dims),
        },
        "loss_trace": model.loss_trace,
        "layers": [
            {
                "activation": layer.activation,
                "rows": layer.weights.shape[0],
                "cols": layer.weights.shape[1],
                "weights": layer.weights.ravel().tolist(),
                "bias": layer.bias.tolist(),
            }
            for layer in model.layers
        ],
    }
    Path(path).write_text(json.dumps(payload))


def load_model(path: str | Path, registry: FeatureRegistry) -> AutoencoderModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    payload = json.loads(path.read_text())
    if payload.get("format") != "semrules-autoencoder" or payload.get("version") != 1:
        raise ModelError(f"unrecognized model file format in {path}")
    if payload["registry_hash"] != registry.content_hash():
        raise ModelError(
            "registry hash mismatch: model was trained against a different feature registry"
        )
    layers = [
        Layer(
            weights=np.array(entry["weights"], dtype=np.float64).reshape(entry["rows"], entry["cols"]),
            bias=np.array(entry["bias"], dtype=np.float64),
            activation=entry["activation"],
        )
        for entry in payload["layers"]
    ]
    cfg = payload.get("train_config")
    config = None
    if cfg is not None:
        config = TrainConfig(
            learning_rate=cfg["learning_rate"],
            epochs=cfg["epochs"],
            weight_decay=cfg["weight_decay"],
            noise_factor=cfg["noise_factor"],
            batch_size=cfg["batch_size"],
            seed=cfg["seed"],
            hidden_dims=None if cfg["hidden_dims"] is None else tuple(cfg["hidden_dims"]),
        )
    model = AutoencoderModel(
        layers=layers,
        registry=registry,
        hidden_dims=tuple(payload["hidden_dims"]),
        seed=payload["seed"],
        config=config,
        loss_trace=list(payload.get("loss_trace", [])),
    )
    return model
