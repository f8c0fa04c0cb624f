"""Minimal dense-network engine: forward, backprop, BCE, minibatch SGD.

Sized for 3-hidden-layer generators/discriminators; no autodiff, no GPU.
Gradients are averaged over the batch so the learning rate keeps the same
meaning at every batch size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

EPS = 1e-7  # probability clamp before log
LEAKY_SLOPE = 0.01
CHECKPOINT_VERSION = 1

ACTIVATIONS = ("tanh", "sigmoid", "leaky_relu", "linear")


class DivergenceError(RuntimeError):
    """Non-finite value hit during training; carries the offending layer."""

    def __init__(self, message, layer_index=None):
        super().__init__(message)
        self.layer_index = layer_index


@dataclass(frozen=True)
class LayerSpec:
    input_dim: int
    output_dim: int
    activation: str

    def validate(self):
        if self.input_dim <= 0 or self.output_dim <= 0:
            raise ValueError("layer dimensions must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


def _sigmoid(x):
    # Split by sign to stay finite for large |x|.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _activate(name, z):
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return _sigmoid(z)
    if name == "leaky_relu":
        return np.where(z > 0, z, LEAKY_SLOPE * z)
    return z


def _activation_grad(name, a):
    """Derivative of the activation expressed through its output value."""
    if name == "tanh":
        return 1.0 - a * a
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "leaky_relu":
        return np.where(a > 0, 1.0, LEAKY_SLOPE)
    return np.ones_like(a)


def bce_loss(predictions, targets):
    """Mean binary cross-entropy with predictions clamped to [EPS, 1-EPS]."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValueError(f"shape mismatch: {predictions.shape} vs {targets.shape}")
    p = np.clip(predictions, EPS, 1.0 - EPS)
    return float(np.mean(-(targets * np.log(p) + (1.0 - targets) * np.log(1.0 - p))))


class MlpModel:
    """Fully-connected stack with per-layer activations.

    Updates are plain SGD by default (learning_rate times the mean
    gradient). Setting optimizer="adam" switches apply_gradients to Adam
    with the usual moment estimates, which the adversarial training loop
    needs to converge inside its epoch budget.
    """

    def __init__(self, specs, weights, biases, learning_rate, optimizer="sgd"):
        if optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {optimizer!r}")
        self.specs = list(specs)
        self.weights = weights
        self.biases = biases
        self.learning_rate = float(learning_rate)
        self.optimizer = optimizer
        self._adam_state = None

    @property
    def input_dim(self):
        return self.specs[0].input_dim

    @property
    def output_dim(self):
        return self.specs[-1].output_dim

    @property
    def parameter_count(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def forward(self, inputs):
        """All layer activations, inputs first: [a0, a1, ..., aL]."""
        a = np.atleast_2d(np.asarray(inputs, dtype=float))
        if a.shape[1] != self.input_dim:
            raise ValueError(f"input width {a.shape[1]} != model input dim {self.input_dim}")
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite values in network input")
        activations = [a]
        for spec, w, b in zip(self.specs, self.weights, self.biases):
            a = _activate(spec.activation, a @ w + b)
            activations.append(a)
        return activations

    def predict(self, inputs):
        return self.forward(inputs)[-1]

    def backward(self, activations, targets=None, output_grad=None):
        """Backprop through the stored activations.

        Exactly one of targets / output_grad must be given. With targets
        the head loss is mean BCE (fused with a sigmoid head for
        stability); with output_grad the caller supplies dLoss/dOutput,
        which lets another network's input gradient drive this one.
        Returns (weight_grads, bias_grads, input_grad).
        """
        if (targets is None) == (output_grad is None):
            raise ValueError("pass exactly one of targets / output_grad")
        out = activations[-1]
        head = self.specs[-1].activation
        if targets is not None:
            targets = np.asarray(targets, dtype=float)
            if targets.shape != out.shape:
                raise ValueError(f"shape mismatch: {out.shape} vs {targets.shape}")
            if head == "sigmoid":
                delta = (out - targets) / targets.size
            else:
                p = np.clip(out, EPS, 1.0 - EPS)
                dldp = (p - targets) / (p * (1.0 - p)) / targets.size
                delta = dldp * _activation_grad(head, out)
        else:
            delta = output_grad * _activation_grad(head, out)

        weight_grads = [None] * len(self.specs)
        bias_grads = [None] * len(self.specs)
        for layer in range(len(self.specs) - 1, -1, -1):
            weight_grads[layer] = activations[layer].T @ delta
            bias_grads[layer] = delta.sum(axis=0)
            delta = delta @ self.weights[layer].T
            if layer > 0:
                delta = delta * _activation_grad(self.specs[layer - 1].activation, activations[layer])
        return weight_grads, bias_grads, delta

    def apply_gradients(self, weight_grads, bias_grads):
        for layer, (gw, gb) in enumerate(zip(weight_grads, bias_grads)):
            if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
                raise DivergenceError(f"non-finite gradient in layer {layer}", layer_index=layer)
        if self.optimizer == "adam":
            self._adam_step(weight_grads, bias_grads)
            return
        for layer, (gw, gb) in enumerate(zip(weight_grads, bias_grads)):
            self.weights[layer] -= self.learning_rate * gw
            self.biases[layer] -= self.learning_rate * gb

    def _adam_step(self, weight_grads, bias_grads, beta1=0.5, beta2=0.999, eps=1e-8):
        if self._adam_state is None:
            self._adam_state = {
                "t": 0,
                "m": [np.zeros_like(p) for p in self.weights + self.biases],
                "v": [np.zeros_like(p) for p in self.weights + self.biases],
            }
        state = self._adam_state
        state["t"] += 1
        t = state["t"]
        params = self.weights + self.biases
        grads = list(weight_grads) + list(bias_grads)
        for p, g, m, v in zip(params, grads, state["m"], state["v"]):
            m *= beta1
            m += (1.0 - beta1) * g
            v *= beta2
            v += (1.0 - beta2) * g * g
            m_hat = m / (1.0 - beta1**t)
            v_hat = v / (1.0 - beta2**t)
            p -= self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)

    def train_batch(self, inputs, targets):
        """One SGD step on a minibatch; returns the pre-update BCE loss."""
        activations = self.forward(inputs)
        loss = bce_loss(activations[-1], np.asarray(targets, dtype=float))
        weight_grads, bias_grads, _ = self.backward(activations, targets=targets)
        self.apply_gradients(weight_grads, bias_grads)
        return loss

    def copy(self):
        return MlpModel(
            specs=list(self.specs),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            learning_rate=self.learning_rate,
            optimizer=self.optimizer,
        )

    def save(self, path):
        meta = {
            "version": CHECKPOINT_VERSION,
            "learning_rate": self.learning_rate,
            "optimizer": self.optimizer,
            "specs": [[s.input_dim, s.output_dim, s.activation] for s in self.specs],
        }
        arrays = {"meta": np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            arrays[f"w{i}"] = w
            arrays[f"b{i}"] = b
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path):
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(bytes(data["meta"]).decode("utf-8"))
            if meta["version"] != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta['version']}")
            specs = [LayerSpec(i, o, act) for i, o, act in meta["specs"]]
            weights = [data[f"w{i}"].copy() for i in range(len(specs))]
            biases = [data[f"b{i}"].copy() for i in range(len(specs))]
        return cls(
            specs=specs,
            weights=weights,
            biases=biases,
            learning_rate=meta["learning_rate"],
            optimizer=meta.get("optimizer", "sgd"),
        )


def init_model(specs, learning_rate, seed, optimizer="sgd"):
    """Xavier-style init: N(0, 1/input_dim) weights, zero biases."""
    specs = list(specs)
    if not specs:
        raise ValueError("at least one layer spec required")
    for spec in specs:
        spec.validate()
    for prev, nxt in zip(specs, specs[1:]):
        if prev.output_dim != nxt.input_dim:
            raise ValueError(
                f"layer dims do not chain: {prev.output_dim} -> {nxt.input_dim}"
            )
    rng = np.random.default_rng(seed)
    weights = [
        rng.normal(0.0, np.sqrt(1.0 / s.input_dim), size=(s.input_dim, s.output_dim))
        for s in specs
    ]
    biases = [np.zeros(s.output_dim) for s in specs]
    return MlpModel(
        specs=specs, weights=weights, biases=biases,
        learning_rate=learning_rate, optimizer=optimizer,
    )
