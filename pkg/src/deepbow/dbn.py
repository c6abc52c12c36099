"""Stacked-RBM classifier: greedy pre-training, softmax label layer, fine-tuning.

An architecture like [1001, 500, 13] means 1001 inputs, one hidden layer of
500 units and 13 label units. Zero hidden layers is allowed (plain softmax
regression) but cannot be pre-trained. The label layer is a discriminative
softmax trained with cross-entropy.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .rbm import CdConfig, RbmLayer, train_rbm

MODEL_MAGIC = b"DBNM"
MODEL_VERSION = 1
MAX_HIDDEN_LAYERS = 3


class ModelFormatError(ValueError):
    """Raised for malformed model streams (bad magic/version, truncation)."""


def check_architecture(layer_sizes) -> list[int]:
    sizes = list(layer_sizes)
    if len(sizes) < 2:
        raise ValueError("architecture needs at least input and output sizes")
    if any((not isinstance(s, (int, np.integer))) or s < 1 for s in sizes):
        raise ValueError("layer sizes must be positive integers")
    n_hidden = len(sizes) - 2
    if n_hidden > MAX_HIDDEN_LAYERS:
        raise ValueError(f"at most {MAX_HIDDEN_LAYERS} hidden layers are supported")
    return [int(s) for s in sizes]


@dataclass(eq=False)
class DbnClassifier:
    """Ordered RBM stack plus a softmax label layer."""

    rbm_layers: list[RbmLayer]
    label_weights: np.ndarray
    label_bias: np.ndarray

    def __post_init__(self):
        self.label_weights = np.array(self.label_weights, dtype=np.float64)
        self.label_bias = np.array(self.label_bias, dtype=np.float64)
        if self.label_weights.ndim != 2 or self.label_bias.ndim != 1:
            raise ValueError("label_weights must be 2-D and label_bias 1-D")
        if self.label_weights.shape[0] != self.label_bias.size:
            raise ValueError("label layer dims inconsistent")
        top = self.rbm_layers[-1].n_hidden if self.rbm_layers else self.label_weights.shape[1]
        if self.label_weights.shape[1] != top:
            raise ValueError("label layer does not chain onto the top hidden layer")
        for lo, hi in zip(self.rbm_layers, self.rbm_layers[1:]):
            if hi.n_visible != lo.n_hidden:
                raise ValueError("adjacent RBM layer dims do not chain")
        if not (np.isfinite(self.label_weights).all() and np.isfinite(self.label_bias).all()):
            raise ValueError("non-finite label parameters")
        check_architecture(self.layer_sizes)

    @property
    def layer_sizes(self) -> list[int]:
        sizes = [self.rbm_layers[0].n_visible] if self.rbm_layers else [self.label_weights.shape[1]]
        sizes += [layer.n_hidden for layer in self.rbm_layers]
        sizes.append(self.label_bias.size)
        return sizes

    @property
    def n_input(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return self.label_bias.size

    @property
    def n_hidden_layers(self) -> int:
        return len(self.rbm_layers)

    def copy(self) -> "DbnClassifier":
        return DbnClassifier([layer.copy() for layer in self.rbm_layers],
                             self.label_weights.copy(), self.label_bias.copy())

    def parameters(self) -> dict[str, np.ndarray]:
        """Name -> array views, in the serialization order."""
        params: dict[str, np.ndarray] = {}
        for i, layer in enumerate(self.rbm_layers):
            params[f"rbm{i}.weights"] = layer.weights
            params[f"rbm{i}.visible_bias"] = layer.visible_bias
            params[f"rbm{i}.hidden_bias"] = layer.hidden_bias
        params["label.weights"] = self.label_weights
        params["label.bias"] = self.label_bias
        return params


@dataclass(frozen=True)
class FinetuneConfig:
    """Supervised-phase hyperparameters. ``mode`` picks full backprop or top layer only."""

    mode: str = "full_network"
    learning_rate: float = 0.1
    epochs: int = 10
    batch_size: int = 100
    weight_decay: float = 0.0002
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("full_network", "top_layer_only"):
            raise ValueError("mode must be 'full_network' or 'top_layer_only'")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def init_random(layer_sizes, scale: float, seed: int) -> DbnClassifier:
    """Fresh model with Gaussian(0, scale^2) weights and zero biases."""
    sizes = check_architecture(layer_sizes)
    if not scale > 0:
        raise ValueError("scale must be > 0")
    rng = np.random.default_rng(seed)
    layers = [RbmLayer.random(sizes[i], sizes[i + 1], scale, rng)
              for i in range(len(sizes) - 2)]
    top = sizes[-2]
    label_w = rng.normal(0.0, scale, size=(sizes[-1], top))
    return DbnClassifier(layers, label_w, np.zeros(sizes[-1]))


def _check_input(model: DbnClassifier, v: np.ndarray) -> tuple[np.ndarray, bool]:
    v = np.asarray(v, dtype=np.float64)
    single = v.ndim == 1
    if single:
        v = v[None, :]
    if v.ndim != 2 or v.shape[1] != model.n_input:
        raise ValueError(f"input dim does not match model input size {model.n_input}")
    if not np.isfinite(v).all():
        raise ValueError("non-finite input")
    return v, single


def hidden_stack(model: DbnClassifier, v: np.ndarray) -> list[np.ndarray]:
    """Mean-field activations after each hidden layer (list of (n, size) arrays)."""
    acts = []
    a = v
    for layer in model.rbm_layers:
        a = expit(layer.hidden_bias + a @ layer.weights.T)
        acts.append(a)
    return acts

def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: DbnClassifier, v: np.ndarray) -> np.ndarray:
    """Class probabilities for one histogram or a batch of them."""
    v, single = _check_input(model, v)
    a = hidden_stack(model, v)[-1] if model.rbm_layers else v
    probs = _softmax(model.label_bias + a @ model.label_weights.T)
    return probs[0] if single else probs


def _check_labels(model: DbnClassifier, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (X.shape[0],):
        raise ValueError("labels must be one per sample")
    if y.size == 0:
        raise ValueError("data must be non-empty")
    yi = y.astype(np.int64)
    if not np.array_equal(yi, y) or yi.min() < 0 or yi.max() >= model.n_classes:
        raise ValueError(f"labels must be integers in [0, {model.n_classes})")
    return yi


def cross_entropy(model: DbnClassifier, X: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy of the true class under ``forward``."""
    X, _ = _check_input(model, X)
    y = _check_labels(model, X, y)
    probs = forward(model, X)
    return float(-np.mean(np.log(probs[np.arange(len(y)), y] + 1e-300)))


def loss_and_gradients(model: DbnClassifier, X: np.ndarray, y: np.ndarray,
                       top_only: bool = False) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy and its backprop gradient for every parameter.

    Gradients come back under the same names as ``model.parameters()``;
    visible biases do not enter the feed-forward pass, so theirs are zero.
    With ``top_only`` the per-layer backward sweep is skipped and only the
    label-layer entries are filled in (the rest stay zero).
    """
    X, _ = _check_input(model, X)
    y = _check_labels(model, X, y)
    n = X.shape[0]

    acts = hidden_stack(model, X)
    top = acts[-1] if acts else X
    probs = _softmax(model.label_bias + top @ model.label_weights.T)
    loss = float(-np.mean(np.log(probs[np.arange(n), y] + 1e-300)))

    grads = {name: np.zeros_like(p) for name, p in model.parameters().items()}
    d_logits = probs.copy()
    d_logits[np.arange(n), y] -= 1.0
    d_logits /= n
    grads["label.weights"] = d_logits.T @ top
    grads["label.bias"] = d_logits.sum(axis=0)

    if not top_only and model.rbm_layers:
        d_a = d_logits @ model.label_weights
        for i in range(len(model.rbm_layers) - 1, -1, -1):
            a = acts[i]
            below = acts[i - 1] if i > 0 else X
            d_z = d_a * a * (1.0 - a)
            grads[f"rbm{i}.weights"] = d_z.T @ below
            grads[f"rbm{i}.hidden_bias"] = d_z.sum(axis=0)
            if i > 0:
                d_a = d_z @ model.rbm_layers[i].weights
    return loss, grads


@dataclass
class TrainingTrace:
    """Per-epoch record of the supervised phase (epochs count sweeps, from 1)."""

    epoch: np.ndarray
    train_loss: np.ndarray
    train_error: np.ndarray
    test_error: np.ndarray | None = None

    def __len__(self) -> int:
        return self.epoch.size


def finetune(model: DbnClassifier, X: np.ndarray, y: np.ndarray, cfg: FinetuneConfig,
             eval_data: tuple[np.ndarray, np.ndarray] | None = None,
             ) -> tuple[DbnClassifier, TrainingTrace]:
    """Mini-batch gradient descent on the cross-entropy; returns (model, trace).

    ``mode='top_layer_only'`` leaves every RBM parameter untouched. When
    ``eval_data`` = (X_test, y_test) is given the trace also records the test
    error after each epoch. Deterministic for fixed cfg.seed.
    """
    X, _ = _check_input(model, X)
    y = _check_labels(model, X, y)
    model = model.copy()
    rng = np.random.default_rng(cfg.seed)
    top_only = cfg.mode == "top_layer_only"
    n = X.shape[0]

    epochs_out, losses, errors, test_errors = [], [], [], []
    for epoch in range(1, cfg.epochs + 1):
        perm = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            _, grads = loss_and_gradients(model, X[idx], y[idx], top_only=top_only)
            params = model.parameters()
            for name, p in params.items():
                if top_only and not name.startswith("label."):
                    continue
                g = grads[name]
                if name.endswith(".weights"):
                    g = g + cfg.weight_decay * p
                p -= cfg.learning_rate * g
        epochs_out.append(epoch)
        losses.append(cross_entropy(model, X, y))
        errors.append(error_rate(model, X, y))
        if eval_data is not None:
            test_errors.append(error_rate(model, eval_data[0], eval_data[1]))

    trace = TrainingTrace(np.array(epochs_out, dtype=np.int64),
                          np.array(losses), np.array(errors),
                          np.array(test_errors) if eval_data is not None else None)
    return model, trace


def pretrain_greedy(model: DbnClassifier, data: np.ndarray, epochs_per_layer: int,
                    cfg: CdConfig) -> DbnClassifier:
    """Greedy layer-wise CD: each layer trains on the mean-field output of the stack below.

    The label layer is untouched. One epoch is one full sweep through the
    training set.
    """
    if model.n_hidden_layers == 0:
        raise ValueError("model has no hidden layers; nothing to pre-train")
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("data must be a non-empty 2-D array")
    if data.shape[1] != model.n_input:
        raise ValueError(f"data dim {data.shape[1]} != model input {model.n_input}")
    if epochs_per_layer < 0:
        raise ValueError("epochs_per_layer must be >= 0")

    model = model.copy()
    rng = np.random.default_rng(cfg.seed)
    inputs = data
    for i, layer in enumerate(model.rbm_layers):
        model.rbm_layers[i] = train_rbm(layer, inputs, epochs_per_layer, cfg, rng)
        inputs = expit(model.rbm_layers[i].hidden_bias + inputs @ model.rbm_layers[i].weights.T)
    return model


def error_rate(model: DbnClassifier, X: np.ndarray, y: np.ndarray) -> float:
    """Fraction misclassified under argmax; ties go to the lowest class index."""
    X, _ = _check_input(model, X)
    y = _check_labels(model, X, y)
    preds = np.argmax(forward(model, X), axis=1)
    return float(np.mean(preds != y))


def serialize(model: DbnClassifier) -> bytes:
    """Little-endian stream: magic, version, architecture, then float64 parameters."""
    sizes = model.layer_sizes
    parts = [MODEL_MAGIC,
             struct.pack("<I", MODEL_VERSION),
             struct.pack("<I", len(sizes)),
             struct.pack(f"<{len(sizes)}I", *sizes)]
    for p in model.parameters().values():
        parts.append(np.ascontiguousarray(p, dtype="<f8").tobytes())
    return b"".join(parts)


def deserialize(blob: bytes) -> DbnClassifier:
    """Inverse of ``serialize``; raises ModelFormatError with the failing offset."""

    def take(offset: int, count: int, what: str) -> tuple[bytes, int]:
        if offset + count > len(blob):
            raise ModelFormatError(
                f"truncated stream: need {count} bytes for {what} at offset {offset}, "
                f"have {len(blob) - offset}")
        return blob[offset:offset + count], offset + count

    raw, off = take(0, 4, "magic")
    if raw != MODEL_MAGIC:
        raise ModelFormatError(f"bad magic {raw!r} at offset 0 (expected {MODEL_MAGIC!r})")
    raw, off = take(off, 4, "version")
    version = struct.unpack("<I", raw)[0]
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported format version {version} at offset 4")
    raw, off = take(off, 4, "architecture length")
    n_sizes = struct.unpack("<I", raw)[0]
    raw, off = take(off, 4 * n_sizes, "architecture")
    sizes = list(struct.unpack(f"<{n_sizes}I", raw))
    try:
        check_architecture(sizes)
    except ValueError as e:
        raise ModelFormatError(f"invalid architecture {sizes}: {e}") from e

    def take_array(offset: int, shape: tuple[int, ...], what: str) -> tuple[np.ndarray, int]:
        count = int(np.prod(shape))
        raw, new_off = take(offset, 8 * count, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape), new_off

    layers = []
    for i in range(len(sizes) - 2):
        nv, nh = sizes[i], sizes[i + 1]
        w, off = take_array(off, (nh, nv), f"rbm{i}.weights")
        vb, off = take_array(off, (nv,), f"rbm{i}.visible_bias")
        hb, off = take_array(off, (nh,), f"rbm{i}.hidden_bias")
        layers.append(RbmLayer(w, vb, hb))
    lw, off = take_array(off, (sizes[-1], sizes[-2]), "label.weights")
    lb, off = take_array(off, (sizes[-1],), "label.bias")
    if off != len(blob):
        raise ModelFormatError(f"{len(blob) - off} trailing bytes after offset {off}")
    try:
        return DbnClassifier(layers, lw, lb)
    except ValueError as e:
        raise ModelFormatError(f"invalid parameters in stream: {e}") from e


def save_model(model: DbnClassifier, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(model))


def load_model(path) -> DbnClassifier:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
