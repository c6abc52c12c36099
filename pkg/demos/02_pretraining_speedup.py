#!/usr/bin/env python3
"""Pre-training shortens the supervised phase.

Runs the learning-curve experiment on the synthetic benchmark: the same
201-100-5 network fine-tuned from CD pre-trained weights and from small
random weights. The pre-trained run reaches its final test error within a
few epochs; the random-init run needs far longer. CSVs land in
demos/out/learning_curve/.
"""

import os

import numpy as np

from deepbow import harness
from deepbow.dbn import FinetuneConfig
from deepbow.rbm import CdConfig

out_dir = os.path.join(os.path.dirname(__file__), "out", "learning_curve")
cfg = harness.ExperimentConfig(
    kind="learning_curve", seed=0, out_dir=out_dir,
    architecture=(201, 100, 5),
    train_per_class=100, test_per_class=100, split_seed=0,
    pretrain_epochs_per_layer=200,
    cd=CdConfig(learning_rate=1.0, batch_size=100, seed=0),
    finetune=FinetuneConfig("full_network", 0.5, 150, 20, 0.0002, 0),
)

curves = harness.run_learning_curve(cfg, verbose=True)
print()
print("epoch   pretrained   random-init")
for epoch in (1, 2, 5, 10, 25, 50, 100, 150):
    row = [f"{curves[name].test_error[epoch - 1]:.3f}" for name in ("pretrained", "random")]
    print(f"{epoch:5d}   {row[0]:>10}   {row[1]:>11}")

final = curves["pretrained"].test_error[-1]
threshold = 1.1 * final
for name in ("pretrained", "random"):
    errs = curves[name].test_error
    hit = np.flatnonzero(errs <= threshold)
    reach = f"epoch {hit[0] + 1}" if hit.size else f"not within {errs.size} epochs"
    print(f"{name}: reaches {threshold:.3f} ({final:.3f} * 1.1) at {reach}")
print(f"CSVs written to {out_dir}")
