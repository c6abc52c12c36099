#!/usr/bin/env python3
"""A single RBM layer in action.

Trains one layer with CD-1 on clustered synthetic histograms and watches the
reconstruction error fall, then checks on a tiny model that the average CD
update points in the same direction as the exact log-likelihood gradient.
"""

import numpy as np

from deepbow import oracle
from deepbow.rbm import CdConfig, RbmLayer, cd_step, reconstruction_error, train_rbm

rng = np.random.default_rng(0)

# clustered histogram-like data: 3 prototypes, 60 noisy samples
prototypes = rng.dirichlet(np.full(40, 0.1), size=3)
data = np.vstack([rng.multinomial(50, p, size=20) / 50.0 for p in prototypes])

layer = RbmLayer.random(40, 15, scale=0.01, rng=np.random.default_rng(0))
cfg = CdConfig(learning_rate=1.0, batch_size=20, seed=0)

print("training a 40-visible / 15-hidden RBM with CD-1")
print(f"  epoch   0: reconstruction error {reconstruction_error(layer, data):.4f}")
for block in range(5):
    layer = train_rbm(layer, data, 40, cfg)
    err = reconstruction_error(layer, data)
    print(f"  epoch {40 * (block + 1):3d}: reconstruction error {err:.4f}")

print()
print("CD update direction vs the exact gradient (3x3 binary model)")
tiny = RbmLayer.random(3, 3, scale=0.5, rng=np.random.default_rng(314))
binary = (np.random.default_rng(314).random((8, 3)) < 0.5).astype(float)
grad = oracle.exact_gradient(tiny, binary)
gvec = np.concatenate([grad.weights.ravel(), grad.visible_bias, grad.hidden_bias])
tiled = np.tile(binary, (20000, 1))  # 2e4 independent repetitions in one batch
for k in (1, 5, 20):
    step_cfg = CdConfig(k=k, learning_rate=1.0, momentum=0.0, weight_decay=0.0,
                        batch_size=tiled.shape[0], seed=99)
    _, delta = cd_step(tiny, tiled, step_cfg, rng=np.random.default_rng(99))
    dvec = np.concatenate([delta.weights.ravel(), delta.visible_bias, delta.hidden_bias])
    cos = dvec @ gvec / np.linalg.norm(dvec) / np.linalg.norm(gvec)
    print(f"  CD-{k:<2d} cosine with exact gradient: {cos:.4f}")
print("exact log-likelihood of the data:",
      f"{oracle.exact_log_likelihood(tiny, binary):.4f}")
