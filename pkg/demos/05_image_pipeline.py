#!/usr/bin/env python3
"""From pixels to histograms to a trained classifier.

Synthesizes little texture images (three families: two grating orientations
and blob noise), writes them as binary PGMs, runs the full feature pipeline
(patch pyramid -> gradient-orientation descriptors -> k-means vocabulary ->
gridded histograms) and trains a small DBN on the result.

The CLI equivalent of the feature step is
    deepbow features --images demos/out/images --k 24 --grid 2 --out <dir>
"""

import os

import numpy as np

from deepbow import dbn, features, harness
from deepbow.dbn import FinetuneConfig
from deepbow.features import GrayImage, PatchConfig
from deepbow.rbm import CdConfig

out_dir = os.path.join(os.path.dirname(__file__), "out", "image_pipeline")
img_dir = os.path.join(out_dir, "images")
rng = np.random.default_rng(0)


def make_image(family: int) -> GrayImage:
    yy, xx = np.mgrid[0:48, 0:48]
    if family == 0:  # horizontal grating
        freq = rng.uniform(0.3, 0.5)
        img = 0.5 + 0.45 * np.sin(freq * yy + rng.uniform(0, 6.28))
    elif family == 1:  # diagonal grating
        freq = rng.uniform(0.3, 0.5)
        img = 0.5 + 0.45 * np.sin(freq * (xx + yy) / np.sqrt(2) + rng.uniform(0, 6.28))
    else:  # blobby noise
        img = rng.random((6, 6))
        img = np.kron(img, np.ones((8, 8)))
    img = np.clip(img + 0.03 * rng.normal(size=(48, 48)), 0, 1)
    return GrayImage(img)


names = ("horizontal", "diagonal", "blobs")
per_class = 12
for label, name in enumerate(names):
    d = os.path.join(img_dir, name)
    os.makedirs(d, exist_ok=True)
    for i in range(per_class):
        features.write_pgm(make_image(label), os.path.join(d, f"{name}_{i:02d}.pgm"))
print(f"wrote {3 * per_class} PGM images under {img_dir}")

patch_cfg = PatchConfig(patch_size=16, grid_spacing=8, variance_threshold=1e-5)
images, labels = [], []
for label, name in enumerate(names):
    d = os.path.join(img_dir, name)
    for f in sorted(os.listdir(d)):
        images.append(features.read_pgm(os.path.join(d, f)))
        labels.append(label)

descriptors = []
for img in images:
    for patch in features.extract_patch_pyramid(img, patch_cfg):
        descriptors.append(features.describe_patch(patch.pixels,
                                                   patch_cfg.variance_threshold))
low_var = sum(d.low_variance for d in descriptors)
print(f"extracted {len(descriptors)} patch descriptors ({low_var} low-variance)")

codebook = features.kmeans_codebook(descriptors, 24, seed=0)
features.save_codebook(codebook, os.path.join(out_dir, "codebook.cbk"))
samples = [features.image_histogram(img, codebook, patch_cfg, grid=2, label=label)
           for img, label in zip(images, labels)]
harness.save_histogram_dataset(samples, os.path.join(out_dir, "histograms.csv"))
print(f"histograms: {len(samples)} samples of dim {samples[0].values.size} "
      f"(24 words x 2x2 cells + low-variance bin)")

train, test = harness.split_by_class(samples, 8, 4, seed=0)
Xtr, ytr = harness.to_arrays(train)
Xte, yte = harness.to_arrays(test)
model = dbn.init_random([samples[0].values.size, 30, 3], 0.01, seed=0)
model = dbn.pretrain_greedy(model, Xtr, 400, CdConfig(learning_rate=1.0, batch_size=12,
                                                      seed=0))
model, trace = dbn.finetune(model, Xtr, ytr,
                            FinetuneConfig("full_network", 0.5, 100, 8, 0.0002, 0),
                            eval_data=(Xte, yte))
print(f"after pre-training + {len(trace)} fine-tune epochs: "
      f"train error {trace.train_error[-1]:.3f}, test error {trace.test_error[-1]:.3f}")
print(f"artifacts in {out_dir}")
