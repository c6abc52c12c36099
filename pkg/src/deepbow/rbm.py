"""Restricted Boltzmann machine layer with CD-k training.

Visible units hold real values in [0, 1] fed directly as probabilities,
which suits normalized word histograms; hidden units are stochastic binary.
During Gibbs sampling the hidden states are sampled and the visible
reconstructions stay mean-field (never sampled).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import expit


class RbmDelta(NamedTuple):
    """Parameter-shaped triple used for momentum state and gradients."""

    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray


@dataclass(eq=False)
class RbmLayer:
    """One RBM layer: ``weights`` is (n_hidden, n_visible) plus the two bias vectors."""

    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64)
        self.visible_bias = np.array(self.visible_bias, dtype=np.float64)
        self.hidden_bias = np.array(self.hidden_bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.visible_bias.ndim != 1 or self.hidden_bias.ndim != 1:
            raise ValueError("weights must be 2-D and biases 1-D")
        if self.weights.shape != (self.hidden_bias.size, self.visible_bias.size):
            raise ValueError(
                f"inconsistent dims: weights {self.weights.shape}, "
                f"visible_bias {self.visible_bias.size}, hidden_bias {self.hidden_bias.size}"
            )
        for a in (self.weights, self.visible_bias, self.hidden_bias):
            if not np.isfinite(a).all():
                raise ValueError("non-finite parameter value")

    @property
    def n_visible(self) -> int:
        return self.visible_bias.size

    @property
    def n_hidden(self) -> int:
        return self.hidden_bias.size

    def copy(self) -> "RbmLayer":
        return RbmLayer(self.weights.copy(), self.visible_bias.copy(), self.hidden_bias.copy())

    @classmethod
    def random(cls, n_visible: int, n_hidden: int, scale: float = 0.01,
               rng: np.random.Generator | None = None) -> "RbmLayer":
        """Gaussian(0, scale^2) weights, zero biases."""
        if n_visible < 1 or n_hidden < 1:
            raise ValueError("layer sizes must be positive")
        if not scale > 0:
            raise ValueError("scale must be > 0")
        if rng is None:
            rng = np.random.default_rng(0)
        w = rng.normal(0.0, scale, size=(n_hidden, n_visible))
        return cls(w, np.zeros(n_visible), np.zeros(n_hidden))

    def zero_delta(self) -> RbmDelta:
        return RbmDelta(np.zeros_like(self.weights),
                        np.zeros_like(self.visible_bias),
                        np.zeros_like(self.hidden_bias))


@dataclass(frozen=True)
class CdConfig:
    """Contrastive-divergence hyperparameters.

    Momentum starts at ``momentum`` and is raised to ``final_momentum`` from
    epoch ``momentum_switch_epoch`` on (epochs counted from zero).
    """

    k: int = 1
    learning_rate: float = 0.01
    momentum: float = 0.5
    weight_decay: float = 0.0002
    batch_size: int = 100
    seed: int = 0
    final_momentum: float = 0.9
    momentum_switch_epoch: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if not self.learning_rate >= 0:  # 0 permitted: it makes cd_step the identity
            raise ValueError("learning_rate must be >= 0")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if not 0.0 <= self.final_momentum < 1.0:
            raise ValueError("final_momentum must be in [0, 1)")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.momentum_switch_epoch < 0:
            raise ValueError("momentum_switch_epoch must be >= 0")


def _check_units(layer: RbmLayer, x: np.ndarray, n_units: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != n_units:
        raise ValueError(f"{what} vector length {x.shape[-1]} does not match layer ({n_units})")
    if not np.isfinite(x).all():
        raise ValueError(f"non-finite {what} input")
    if x.min(initial=0.0) < 0.0 or x.max(initial=0.0) > 1.0:
        raise ValueError(f"{what} entries must lie in [0, 1]")
    return x


def hidden_probs(layer: RbmLayer, v: np.ndarray) -> np.ndarray:
    """P(h=1 | v), elementwise logistic. ``v`` may be a vector or a (n, n_visible) batch."""
    v = _check_units(layer, v, layer.n_visible, "visible")
    return expit(layer.hidden_bias + v @ layer.weights.T)


def visible_probs(layer: RbmLayer, h: np.ndarray) -> np.ndarray:
    """P(v=1 | h), elementwise logistic. ``h`` may be a vector or a (n, n_hidden) batch."""
    h = _check_units(layer, h, layer.n_hidden, "hidden")
    return expit(layer.visible_bias + h @ layer.weights)


def sample_bernoulli(p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independent 0/1 draws with per-entry probability p; advances ``rng``."""
    p = np.asarray(p, dtype=np.float64)
    if not np.isfinite(p).all() or p.min(initial=0.0) < 0.0 or p.max(initial=0.0) > 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    return (rng.random(p.shape) < p).astype(np.float64)


def cd_step(layer: RbmLayer, batch: np.ndarray, cfg: CdConfig,
            prev_delta: RbmDelta | None = None,
            rng: np.random.Generator | None = None) -> tuple[RbmLayer, RbmDelta]:
    """One CD-k update on a mini-batch; returns the updated layer and the new delta.

    Positive statistics use data-clamped hidden probabilities; the negative
    phase runs cfg.k Gibbs steps with sampled hidden states and mean-field
    visible reconstructions. The update is

        delta = momentum * prev_delta
                + learning_rate * ((pos - neg) / len(batch) - weight_decay * weights)

    with the decay term applied to the weight matrix only. Deterministic for
    a fixed rng state (``cfg.seed`` when no rng is passed).
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[0] == 0:
        raise ValueError("batch must be a non-empty (n, n_visible) array")
    batch = _check_units(layer, batch, layer.n_visible, "visible")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if prev_delta is None:
        prev_delta = layer.zero_delta()

    w, vb, hb = layer.weights, layer.visible_bias, layer.hidden_bias
    n = batch.shape[0]

    with np.errstate(over="ignore", invalid="ignore"):  # non-finite results raise below
        h0 = expit(hb + batch @ w.T)
        pos_w = h0.T @ batch
        pos_vb = batch.sum(axis=0)
        pos_hb = h0.sum(axis=0)

        v = batch
        hp = h0
        for _ in range(cfg.k):
            hs = sample_bernoulli(hp, rng)
            v = expit(vb + hs @ w)
            hp = expit(hb + v @ w.T)
        neg_w = hp.T @ v
        neg_vb = v.sum(axis=0)
        neg_hb = hp.sum(axis=0)

        d_w = cfg.momentum * prev_delta.weights + cfg.learning_rate * (
            (pos_w - neg_w) / n - cfg.weight_decay * w)
        d_vb = (cfg.momentum * prev_delta.visible_bias
                + cfg.learning_rate * (pos_vb - neg_vb) / n)
        d_hb = (cfg.momentum * prev_delta.hidden_bias
                + cfg.learning_rate * (pos_hb - neg_hb) / n)

        new_w = w + d_w
        new_vb = vb + d_vb
        new_hb = hb + d_hb
    for a in (new_w, new_vb, new_hb):
        if not np.isfinite(a).all():
            raise FloatingPointError("CD update produced non-finite parameters")
    return RbmLayer(new_w, new_vb, new_hb), RbmDelta(d_w, d_vb, d_hb)


def reconstruction_error(layer: RbmLayer, data: np.ndarray) -> float:
    """Mean squared reconstruction distance under a deterministic mean-field round trip."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[0] == 0:
        raise ValueError("data must be non-empty")
    recon = visible_probs(layer, hidden_probs(layer, data))
    return float(np.mean(np.sum((data - recon) ** 2, axis=1)))


def train_rbm(layer: RbmLayer, data: np.ndarray, epochs: int, cfg: CdConfig,
              rng: np.random.Generator | None = None) -> RbmLayer:
    """Run ``epochs`` sweeps of mini-batch CD over ``data`` (shuffled each sweep)."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("data must be a non-empty (n, n_visible) array")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n = data.shape[0]
    delta = layer.zero_delta()
    for epoch in range(epochs):
        epoch_cfg = cfg if epoch < cfg.momentum_switch_epoch else replace(
            cfg, momentum=cfg.final_momentum)
        perm = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            layer, delta = cd_step(layer, data[idx], epoch_cfg, delta, rng)
    return layer
