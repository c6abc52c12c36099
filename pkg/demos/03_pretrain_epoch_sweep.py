#!/usr/bin/env python3
"""Test error as a function of the pre-training epoch budget.

More pre-training first helps and then saturates. Fine-tuning is held to a
short fixed budget (5 epochs) so the quality of the unsupervised features
dominates the result. Output CSV: demos/out/pretrain_sweep/pretrain_sweep.csv.
"""

import os

from deepbow import harness
from deepbow.dbn import FinetuneConfig
from deepbow.rbm import CdConfig

out_dir = os.path.join(os.path.dirname(__file__), "out", "pretrain_sweep")
cfg = harness.ExperimentConfig(
    kind="pretrain_sweep", seed=1, out_dir=out_dir,
    architecture=(201, 100, 5),
    train_per_class=100, test_per_class=100, split_seed=1,
    cd=CdConfig(learning_rate=1.0, batch_size=100, seed=1),
    finetune=FinetuneConfig("full_network", 0.5, 5, 20, 0.0002, 1),
    epoch_grid=(0, 10, 25, 50, 100, 200, 400),
)

rows = harness.sweep_pretrain_epochs(cfg, verbose=True)
print()
print("pretrain epochs   test error after 5 fine-tune epochs")
for epochs, err in rows:
    bar = "#" * int(round(err * 40))
    print(f"{epochs:15d}   {err:.3f} {bar}")
print(f"CSV written to {out_dir}")
