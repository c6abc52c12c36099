#!/usr/bin/env python3
"""Two uses of unlabeled data.

First: pre-train once on 100 unlabeled examples per category, then fine-tune
on ever smaller labeled subsets (1..64 per category) with a no-pretraining
control. Second: pre-train on a *different* dataset that only shares the
background word distribution, and compare against same-set pre-training.
CSVs land in demos/out/labeled_size/ and demos/out/transfer/.
"""

import os

from deepbow import harness
from deepbow.dbn import FinetuneConfig
from deepbow.rbm import CdConfig

base = os.path.join(os.path.dirname(__file__), "out")

print("labeled-size sweep: shared pre-training, shrinking supervised sets")
cfg = harness.ExperimentConfig(
    kind="labeled_size_sweep", seed=2, out_dir=os.path.join(base, "labeled_size"),
    architecture=(201, 100, 5),
    train_per_class=100, test_per_class=100, split_seed=2,
    pretrain_epochs_per_layer=200,
    cd=CdConfig(learning_rate=1.0, batch_size=100, seed=2),
    finetune=FinetuneConfig("full_network", 0.5, 30, 10, 0.0002, 2),
    sizes=(1, 2, 4, 8, 16, 32, 64), pretrain_per_class=100,
)
rows = harness.sweep_labeled_size(cfg)
print("labeled/class   pretrained   no pre-training")
for size, err_pre, err_rand in rows:
    print(f"{size:13d}   {err_pre:10.3f}   {err_rand:15.3f}")

print()
print("transfer: pre-train on dataset A, fine-tune on dataset B (shared background)")
spec = harness.SyntheticSpec(background_seed=7)
dataset_a = harness.synth_dataset(spec, 1000)
dataset_b = harness.synth_dataset(spec, 2000)
tcfg = harness.ExperimentConfig(
    kind="transfer", seed=3, out_dir=os.path.join(base, "transfer"),
    architecture=(201, 100, 5),
    train_per_class=100, test_per_class=100, split_seed=3,
    pretrain_epochs_per_layer=200,
    cd=CdConfig(learning_rate=1.0, batch_size=100, seed=3),
    finetune=FinetuneConfig("full_network", 0.5, 40, 20, 0.0002, 3),
)
transfer, same = harness.run_transfer(tcfg, dataset_a, dataset_b, verbose=True)
print(f"final test error, transfer pre-training: {transfer.test_error[-1]:.3f}")
print(f"final test error, same-set pre-training: {same.test_error[-1]:.3f}")
print(f"CSVs in {base}/labeled_size and {base}/transfer")
