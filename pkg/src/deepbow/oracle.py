"""Exact inference on tiny binary-binary RBMs by state enumeration.

Ground truth for contrastive-divergence and likelihood tests. Everything here
is limited to models with n_visible + n_hidden <= 20 so the 2^n state space
stays enumerable. The energy convention is

    E(v, h) = -v.b - h.c - h^T W v

with W of shape (n_hidden, n_visible). Hidden units are summed out
analytically (softplus), so a brute-force double loop over (v, h) pairs makes
an independent cross-check.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, logsumexp

from .rbm import RbmDelta, RbmLayer

MAX_TOTAL_UNITS = 20


def _check_size(layer: RbmLayer) -> None:
    total = layer.n_visible + layer.n_hidden
    if total > MAX_TOTAL_UNITS:
        raise ValueError(
            f"model has {total} units; exact enumeration is limited to {MAX_TOTAL_UNITS}")


def _check_binary_data(layer: RbmLayer, data: np.ndarray) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[0] == 0:
        raise ValueError("data must be non-empty")
    if data.shape[1] != layer.n_visible:
        raise ValueError(f"data dim {data.shape[1]} != n_visible {layer.n_visible}")
    if not np.isin(data, (0.0, 1.0)).all():
        raise ValueError("oracle data must be binary")
    return data


def all_binary_states(n: int) -> np.ndarray:
    """(2^n, n) array enumerating every binary vector of length n."""
    ints = np.arange(2 ** n)[:, None]
    return ((ints >> np.arange(n)[::-1]) & 1).astype(np.float64)


def _unnormalized_log_prob(layer: RbmLayer, v_states: np.ndarray) -> np.ndarray:
    # log sum_h exp(-E(v, h)) = v.b + sum_i softplus(c_i + (W v)_i)
    hidden_in = layer.hidden_bias + v_states @ layer.weights.T
    return v_states @ layer.visible_bias + np.logaddexp(0.0, hidden_in).sum(axis=1)


def exact_log_partition(layer: RbmLayer) -> float:
    """log Z over all binary (v, h) pairs, log-sum-exp stabilized."""
    _check_size(layer)
    v_states = all_binary_states(layer.n_visible)
    return float(logsumexp(_unnormalized_log_prob(layer, v_states)))


def exact_log_likelihood(layer: RbmLayer, data: np.ndarray) -> float:
    """Mean log p(v) over the rows of ``data``."""
    _check_size(layer)
    data = _check_binary_data(layer, data)
    return float(np.mean(_unnormalized_log_prob(layer, data))) - exact_log_partition(layer)


def exact_gradient(layer: RbmLayer, data: np.ndarray) -> RbmDelta:
    """Exact gradient of the mean log-likelihood: clamped minus model expectations."""
    _check_size(layer)
    data = _check_binary_data(layer, data)

    ph_data = expit(layer.hidden_bias + data @ layer.weights.T)
    pos_w = ph_data.T @ data / data.shape[0]
    pos_vb = data.mean(axis=0)
    pos_hb = ph_data.mean(axis=0)

    v_states = all_binary_states(layer.n_visible)
    log_unnorm = _unnormalized_log_prob(layer, v_states)
    p_v = np.exp(log_unnorm - logsumexp(log_unnorm))
    ph_model = expit(layer.hidden_bias + v_states @ layer.weights.T)
    neg_w = (ph_model * p_v[:, None]).T @ v_states
    neg_vb = p_v @ v_states
    neg_hb = p_v @ ph_model

    return RbmDelta(pos_w - neg_w, pos_vb - neg_vb, pos_hb - neg_hb)
