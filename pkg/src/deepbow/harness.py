"""Experiment driver: dataset I/O, synthetic data, and the four experiment designs.

Experiments are fully reproducible from (config, seed): every output CSV
carries a header comment with the config digest, seed and tool version, and
re-running a config yields byte-identical files. Files are written atomically
(temp file then rename).
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .dbn import (DbnClassifier, FinetuneConfig, TrainingTrace, check_architecture,
                  error_rate, finetune, init_random, pretrain_greedy)
from .features import HistogramSample
from .rbm import CdConfig


class DatasetFormatError(ValueError):
    """Malformed histogram dataset file."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


EXPERIMENT_KINDS = ("learning_curve", "pretrain_sweep", "labeled_size_sweep", "transfer")


# ---------------------------------------------------------------------------
# dataset files and synthetic data

def save_histogram_dataset(samples: list[HistogramSample], path) -> None:
    """CSV with header `label,grid,K,v0,...`; label -1 marks unlabeled samples."""
    if not samples:
        raise ValueError("no samples to save")
    dim = samples[0].values.size
    lines = ["label,grid,K," + ",".join(f"v{i}" for i in range(dim))]
    for s in samples:
        if s.values.size != dim:
            raise ValueError("samples have inconsistent dims")
        label = -1 if s.label is None else s.label
        values = ",".join(f"{v:.17g}" for v in s.values)
        lines.append(f"{label},{s.grid},{s.k},{values}")
    _write_atomic(path, "\n".join(lines) + "\n")


def load_histogram_dataset(path) -> list[HistogramSample]:
    """Parse the histogram CSV contract; values renormalized when within 1e-6 of sum 1."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DatasetFormatError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[:3] != ["label", "grid", "K"] or len(header) < 4:
        raise DatasetFormatError(f"{path}: line 1: bad header")
    dim = len(header) - 3

    samples: list[HistogramSample] = []
    grid_k: tuple[int, int] | None = None
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != dim + 3:
            raise DatasetFormatError(
                f"{path}: line {ln}: expected {dim + 3} fields, got {len(fields)}")
        try:
            label = int(fields[0])
            grid = int(fields[1])
            k = int(fields[2])
            values = np.array([float(x) for x in fields[3:]])
        except ValueError as e:
            raise DatasetFormatError(f"{path}: line {ln}: {e}") from e
        if grid_k is None:
            grid_k = (grid, k)
        elif grid_k != (grid, k):
            raise DatasetFormatError(f"{path}: line {ln}: inconsistent grid/K")
        if values.size != grid * grid * k + 1:
            raise DatasetFormatError(
                f"{path}: line {ln}: {values.size} values do not match grid^2*K+1")
        if values.min() < 0:
            raise DatasetFormatError(f"{path}: line {ln}: negative histogram entry")
        total = values.sum()
        if abs(total - 1.0) > 1e-6:
            raise DatasetFormatError(f"{path}: line {ln}: histogram sums to {total!r}")
        if abs(total - 1.0) > 1e-9:  # renormalize sloppy rows, keep clean ones bit-exact
            values = values / total
        samples.append(HistogramSample(values, None if label == -1 else label, grid))
    if not samples:
        raise DatasetFormatError(f"{path}: no samples")
    return samples


def to_arrays(samples: list[HistogramSample]) -> tuple[np.ndarray, np.ndarray]:
    """(X, y) matrices; unlabeled samples get y = -1."""
    X = np.array([s.values for s in samples])
    y = np.array([-1 if s.label is None else s.label for s in samples], dtype=np.int64)
    return X, y


@dataclass(frozen=True)
class SyntheticSpec:
    """Desk-scale stand-in for a scene dataset.

    Each class gets a word distribution drawn from a symmetric Dirichlet
    (smaller concentration = sharper, more distinct classes), mixed with a
    shared background distribution by noise_weight. A sample is a normalized
    multinomial draw of words_per_image words.
    """

    n_classes: int = 5
    vocab_size: int = 200
    concentration: float = 0.1
    samples_per_class: int = 200
    words_per_image: int = 50
    noise_weight: float = 0.2
    background_seed: int | None = None

    def __post_init__(self):
        if min(self.n_classes, self.vocab_size, self.samples_per_class,
               self.words_per_image) < 1:
            raise ValueError("all synthetic counts must be positive")
        if not self.concentration > 0:
            raise ValueError("concentration must be > 0")
        if not 0.0 <= self.noise_weight <= 1.0:
            raise ValueError("noise_weight must be in [0, 1]")


def synth_dataset(spec: SyntheticSpec, seed: int) -> list[HistogramSample]:
    """Deterministic synthetic histogram dataset (grid 1, empty low-variance bin)."""
    rng = np.random.default_rng(seed)
    bg_rng = rng if spec.background_seed is None else np.random.default_rng(spec.background_seed)
    background = bg_rng.dirichlet(np.ones(spec.vocab_size))
    samples = []
    for c in range(spec.n_classes):
        class_dist = rng.dirichlet(np.full(spec.vocab_size, spec.concentration))
        p = (1.0 - spec.noise_weight) * class_dist + spec.noise_weight * background
        counts = rng.multinomial(spec.words_per_image, p, size=spec.samples_per_class)
        for row in counts:
            values = np.append(row / spec.words_per_image, 0.0)
            samples.append(HistogramSample(values, label=c, grid=1))
    return samples


def split_by_class(samples: list[HistogramSample], train_per_class: int,
                   test_per_class: int, seed: int,
                   ) -> tuple[list[HistogramSample], list[HistogramSample]]:
    """Seeded stratified split into disjoint train/test lists."""
    labels = sorted({s.label for s in samples})
    if None in labels:
        raise ValueError("split requires labeled samples")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in labels:
        pool = [s for s in samples if s.label == c]
        if len(pool) < train_per_class + test_per_class:
            raise ValueError(
                f"class {c} has {len(pool)} samples, need "
                f"{train_per_class + test_per_class}")
        order = rng.permutation(len(pool))
        train += [pool[i] for i in order[:train_per_class]]
        test += [pool[i] for i in order[train_per_class:train_per_class + test_per_class]]
    return train, test


# ---------------------------------------------------------------------------
# experiment configuration

@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "learning_curve"
    seed: int = 0
    out_dir: str | None = None
    architecture: tuple[int, ...] = (201, 100, 5)
    init_scale: float = 0.01
    dataset: str | None = None               # histogram CSV; overrides `synthetic`
    pretrain_dataset: str | None = None      # transfer only
    synthetic: SyntheticSpec | None = field(default_factory=SyntheticSpec)
    train_per_class: int = 100
    test_per_class: int = 100
    split_seed: int = 0
    pretrain_epochs_per_layer: int = 200
    cd: CdConfig = field(default_factory=lambda: CdConfig(learning_rate=1.0))
    finetune: FinetuneConfig = field(
        default_factory=lambda: FinetuneConfig(learning_rate=0.5, batch_size=20))
    sizes: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)   # labeled-size sweep
    pretrain_per_class: int = 100                       # labeled-size sweep pool
    epoch_grid: tuple[int, ...] = (0, 200)              # pretrain sweep

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        check_architecture(list(self.architecture))
        if self.dataset is None and self.synthetic is None:
            raise ConfigError("config needs a dataset path or a synthetic spec")
        if min(self.train_per_class, self.test_per_class) < 1:
            raise ConfigError("per-class counts must be positive")

    def validate_paths(self) -> None:
        for p in (self.dataset, self.pretrain_dataset):
            if p is not None and not os.path.exists(p):
                raise ConfigError(f"referenced file does not exist: {p}")


_CONFIG_KEYS = {
    "kind", "seed", "out_dir", "arch", "init_scale", "dataset", "pretrain_dataset",
    "synth_classes", "synth_vocab", "synth_concentration", "synth_samples_per_class",
    "synth_words_per_image", "synth_noise", "synth_background_seed",
    "train_per_class", "test_per_class", "split_seed", "pretrain_epochs",
    "cd_k", "cd_learning_rate", "cd_momentum", "cd_final_momentum",
    "cd_weight_decay", "cd_batch_size", "cd_seed",
    "ft_mode", "ft_learning_rate", "ft_epochs", "ft_batch_size",
    "ft_weight_decay", "ft_seed",
    "sizes", "pretrain_per_class", "epoch_grid",
}


def read_raw_config(path) -> dict[str, str]:
    """Flat `key = value` config file; unknown keys are errors."""
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {ln}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}: line {ln}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"{path}: line {ln}: duplicate key {key!r}")
            raw[key] = value
    return raw


def parse_config(path) -> ExperimentConfig:
    return build_config(read_raw_config(path), source=str(path))


def _ints(value: str) -> tuple[int, ...]:
    return tuple(int(x) for x in value.split(",") if x.strip())


def build_config(raw: dict[str, str], source: str = "<args>") -> ExperimentConfig:
    def geti(key, default):
        return int(raw[key]) if key in raw else default

    def getf(key, default):
        return float(raw[key]) if key in raw else default

    try:
        seed = geti("seed", 0)
        synthetic = None
        if "dataset" not in raw or any(k.startswith("synth_") for k in raw):
            synthetic = SyntheticSpec(
                n_classes=geti("synth_classes", 5),
                vocab_size=geti("synth_vocab", 200),
                concentration=getf("synth_concentration", 0.1),
                samples_per_class=geti("synth_samples_per_class", 200),
                words_per_image=geti("synth_words_per_image", 50),
                noise_weight=getf("synth_noise", 0.2),
                background_seed=geti("synth_background_seed", None),
            )
        # normalized histograms have entries ~1/words_per_image, so the CD
        # updates are tiny; the desk-scale default rate is large to compensate
        cd = CdConfig(
            k=geti("cd_k", 1),
            learning_rate=getf("cd_learning_rate", 1.0),
            momentum=getf("cd_momentum", 0.5),
            final_momentum=getf("cd_final_momentum", 0.9),
            weight_decay=getf("cd_weight_decay", 0.0002),
            batch_size=geti("cd_batch_size", 100),
            seed=geti("cd_seed", seed),
        )
        ft = FinetuneConfig(
            mode=raw.get("ft_mode", "full_network"),
            learning_rate=getf("ft_learning_rate", 0.5),
            epochs=geti("ft_epochs", 100),
            batch_size=geti("ft_batch_size", 20),
            weight_decay=getf("ft_weight_decay", 0.0002),
            seed=geti("ft_seed", seed),
        )
        return ExperimentConfig(
            kind=raw.get("kind", "learning_curve"),
            seed=seed,
            out_dir=raw.get("out_dir"),
            architecture=_ints(raw["arch"]) if "arch" in raw else (201, 100, 5),
            init_scale=getf("init_scale", 0.01),
            dataset=raw.get("dataset"),
            pretrain_dataset=raw.get("pretrain_dataset"),
            synthetic=synthetic,
            train_per_class=geti("train_per_class", 100),
            test_per_class=geti("test_per_class", 100),
            split_seed=geti("split_seed", seed),
            pretrain_epochs_per_layer=geti("pretrain_epochs", 200),
            cd=cd,
            finetune=ft,
            sizes=_ints(raw["sizes"]) if "sizes" in raw else (1, 2, 4, 8, 16, 32, 64),
            pretrain_per_class=geti("pretrain_per_class", 100),
            epoch_grid=_ints(raw["epoch_grid"]) if "epoch_grid" in raw else (0, 200),
        )
    except (ValueError, KeyError) as e:
        raise ConfigError(f"{source}: {e}") from e


def config_lines(cfg: ExperimentConfig) -> list[str]:
    """Canonical `key = value` rendering, sorted; the digest is taken over this."""
    items = {
        "kind": cfg.kind, "seed": cfg.seed, "arch": ",".join(map(str, cfg.architecture)),
        "init_scale": cfg.init_scale, "dataset": cfg.dataset or "",
        "pretrain_dataset": cfg.pretrain_dataset or "",
        "train_per_class": cfg.train_per_class, "test_per_class": cfg.test_per_class,
        "split_seed": cfg.split_seed, "pretrain_epochs": cfg.pretrain_epochs_per_layer,
        "cd_k": cfg.cd.k, "cd_learning_rate": cfg.cd.learning_rate,
        "cd_momentum": cfg.cd.momentum, "cd_final_momentum": cfg.cd.final_momentum,
        "cd_weight_decay": cfg.cd.weight_decay, "cd_batch_size": cfg.cd.batch_size,
        "cd_seed": cfg.cd.seed,
        "ft_mode": cfg.finetune.mode, "ft_learning_rate": cfg.finetune.learning_rate,
        "ft_epochs": cfg.finetune.epochs, "ft_batch_size": cfg.finetune.batch_size,
        "ft_weight_decay": cfg.finetune.weight_decay, "ft_seed": cfg.finetune.seed,
        "sizes": ",".join(map(str, cfg.sizes)),
        "pretrain_per_class": cfg.pretrain_per_class,
        "epoch_grid": ",".join(map(str, cfg.epoch_grid)),
    }
    if cfg.synthetic is not None:
        s = cfg.synthetic
        items.update({
            "synth_classes": s.n_classes, "synth_vocab": s.vocab_size,
            "synth_concentration": s.concentration,
            "synth_samples_per_class": s.samples_per_class,
            "synth_words_per_image": s.words_per_image, "synth_noise": s.noise_weight,
            "synth_background_seed": "" if s.background_seed is None else s.background_seed,
        })
    return [f"{k} = {items[k]}" for k in sorted(items)]


def config_digest(cfg: ExperimentConfig) -> str:
    text = "\n".join(config_lines(cfg))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# output plumbing

def _write_atomic(path, text: str) -> None:
    write_atomic_bytes(path, text.encode("utf-8"))


def write_atomic_bytes(path, data: bytes) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta_comment(cfg: ExperimentConfig, **extra) -> str:
    fields = {"config_digest": config_digest(cfg), "seed": cfg.seed,
              "tool_version": __version__, **extra}
    return "# " + ", ".join(f"{k}={v}" for k, v in fields.items())


@dataclass(eq=False)
class LearningCurve:
    """Per-epoch (train_error, test_error, train_loss) rows plus run metadata."""

    epochs: np.ndarray
    train_error: np.ndarray
    test_error: np.ndarray
    train_loss: np.ndarray
    metadata: dict

    def __post_init__(self):
        if not np.all(np.diff(self.epochs) > 0):
            raise ValueError("epochs must be strictly increasing")
        for errs in (self.train_error, self.test_error):
            if errs.size and (errs.min() < 0.0 or errs.max() > 1.0):
                raise ValueError("error rates must lie in [0, 1]")

    @classmethod
    def from_trace(cls, trace: TrainingTrace, metadata: dict) -> "LearningCurve":
        return cls(trace.epoch, trace.train_error, trace.test_error, trace.train_loss,
                   metadata)

    def to_csv(self, cfg: ExperimentConfig, path) -> None:
        lines = [_meta_comment(cfg, **self.metadata),
                 "epoch,train_error,test_error,train_loss"]
        for i in range(self.epochs.size):
            lines.append(f"{self.epochs[i]},{self.train_error[i]:.17g},"
                         f"{self.test_error[i]:.17g},{self.train_loss[i]:.17g}")
        _write_atomic(path, "\n".join(lines) + "\n")


def _load_experiment_data(cfg: ExperimentConfig) -> list[HistogramSample]:
    if cfg.dataset is not None:
        cfg.validate_paths()
        return load_histogram_dataset(cfg.dataset)
    return synth_dataset(cfg.synthetic, cfg.seed)


def _split_arrays(cfg: ExperimentConfig, samples):
    train, test = split_by_class(samples, cfg.train_per_class, cfg.test_per_class,
                                 cfg.split_seed)
    Xtr, ytr = to_arrays(train)
    Xte, yte = to_arrays(test)
    return Xtr, ytr, Xte, yte


def _split_meta(n_train: int, n_test: int) -> dict:
    return {"n_train": n_train, "n_test": n_test, "split": "disjoint"}


# ---------------------------------------------------------------------------
# the four experiment designs

def run_learning_curve(cfg: ExperimentConfig, verbose: bool = False,
                       ) -> dict[str, LearningCurve]:
    """Fig-1 style comparison: pre-trained vs random-init, same seeds throughout.

    Returns one curve per variant and, when cfg.out_dir is set, writes
    learning_curve_<variant>.csv for each.
    """
    samples = _load_experiment_data(cfg)
    Xtr, ytr, Xte, yte = _split_arrays(cfg, samples)
    base = init_random(list(cfg.architecture), cfg.init_scale, cfg.seed)

    variants: dict[str, DbnClassifier] = {}
    if base.n_hidden_layers > 0:
        if verbose:
            print(f"pre-training {list(cfg.architecture)} for "
                  f"{cfg.pretrain_epochs_per_layer} epochs/layer")
        variants["pretrained"] = pretrain_greedy(
            base, Xtr, cfg.pretrain_epochs_per_layer, cfg.cd)
    variants["random"] = base

    curves = {}
    for name, model in variants.items():
        if verbose:
            print(f"fine-tuning variant {name!r} ({cfg.finetune.epochs} epochs)")
        _, trace = finetune(model, Xtr, ytr, cfg.finetune, eval_data=(Xte, yte))
        curve = LearningCurve.from_trace(
            trace, {"variant": name, **_split_meta(len(ytr), len(yte))})
        curves[name] = curve
        if cfg.out_dir:
            curve.to_csv(cfg, os.path.join(cfg.out_dir, f"learning_curve_{name}.csv"))
    return curves


def sweep_pretrain_epochs(cfg: ExperimentConfig, epoch_grid=None, verbose: bool = False,
                          ) -> list[tuple[int, float]]:
    """Final test error as a function of the pre-training epoch count.

    Grid point 0 is the random-init baseline. Fine-tuning is identical at
    every grid point. Returns [(pretrain_epochs, final_test_error), ...] and
    writes pretrain_sweep.csv when cfg.out_dir is set.
    """
    grid = tuple(cfg.epoch_grid if epoch_grid is None else epoch_grid)
    if not grid or any(e < 0 for e in grid) or list(grid) != sorted(grid):
        raise ValueError("epoch grid must be non-empty, non-negative and sorted")
    samples = _load_experiment_data(cfg)
    Xtr, ytr, Xte, yte = _split_arrays(cfg, samples)
    base = init_random(list(cfg.architecture), cfg.init_scale, cfg.seed)

    rows = []
    for epochs in grid:
        if verbose:
            print(f"pretrain_epochs={epochs}")
        model = base if epochs == 0 else pretrain_greedy(base, Xtr, epochs, cfg.cd)
        model, _ = finetune(model, Xtr, ytr, cfg.finetune)
        rows.append((epochs, error_rate(model, Xte, yte)))
    if cfg.out_dir:
        lines = [_meta_comment(cfg), "pretrain_epochs,test_error"]
        lines += [f"{e},{err:.17g}" for e, err in rows]
        _write_atomic(os.path.join(cfg.out_dir, "pretrain_sweep.csv"),
                      "\n".join(lines) + "\n")
    return rows


def sweep_labeled_size(cfg: ExperimentConfig, sizes=None, pretrain_per_class=None,
                       verbose: bool = False) -> list[tuple[int, float, float]]:
    """Test error vs labeled-set size, with one shared pre-training pool.

    Pre-trains once on `pretrain_per_class` unlabeled examples per category,
    then fine-tunes on seeded subsets of that pool; the no-pretraining control
    runs at every size. The test split never overlaps the pool. Returns
    [(size, err_pretrained, err_random), ...].
    """
    sizes = tuple(cfg.sizes if sizes is None else sizes)
    pool_n = cfg.pretrain_per_class if pretrain_per_class is None else pretrain_per_class
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("sizes must be positive")
    if max(sizes) > pool_n:
        raise ValueError("labeled sizes cannot exceed the pre-training pool size")
    samples = _load_experiment_data(cfg)
    pool, test = split_by_class(samples, pool_n, cfg.test_per_class, cfg.split_seed)
    Xpool, ypool = to_arrays(pool)
    Xte, yte = to_arrays(test)

    base = init_random(list(cfg.architecture), cfg.init_scale, cfg.seed)
    if verbose:
        print(f"pre-training once on {pool_n} examples per category")
    pretrained = pretrain_greedy(base, Xpool, cfg.pretrain_epochs_per_layer, cfg.cd)

    classes = np.unique(ypool)
    rng = np.random.default_rng(cfg.seed)
    class_order = {c: rng.permutation(np.flatnonzero(ypool == c)) for c in classes}

    rows = []
    for size in sizes:
        idx = np.concatenate([class_order[c][:size] for c in classes])
        Xs, ys = Xpool[idx], ypool[idx]
        batch = min(cfg.finetune.batch_size, len(idx))
        ft = replace(cfg.finetune, batch_size=batch)
        tuned, _ = finetune(pretrained, Xs, ys, ft)
        control, _ = finetune(base, Xs, ys, ft)
        rows.append((size, error_rate(tuned, Xte, yte), error_rate(control, Xte, yte)))
        if verbose:
            print(f"size={size}: pretrained {rows[-1][1]:.3f}, random {rows[-1][2]:.3f}")
    if cfg.out_dir:
        lines = [_meta_comment(cfg, pretrain_per_class=pool_n),
                 "labeled_per_class,test_error_pretrained,test_error_random"]
        lines += [f"{s},{a:.17g},{b:.17g}" for s, a, b in rows]
        _write_atomic(os.path.join(cfg.out_dir, "labeled_size_sweep.csv"),
                      "\n".join(lines) + "\n")
    return rows


def run_transfer(cfg: ExperimentConfig, pretrain_samples: list[HistogramSample],
                 finetune_samples: list[HistogramSample], verbose: bool = False,
                 ) -> tuple[LearningCurve, LearningCurve]:
    """Transfer pre-training vs same-set pre-training, identical budgets and seeds.

    Variant "transfer" pre-trains on `pretrain_samples` exactly as given
    (their labels are ignored); variant "same_set" pre-trains on the
    fine-tuning train split. Both fine-tune on that split and are evaluated
    on the held-out split, so passing the train split itself as
    `pretrain_samples` makes the two variants coincide.
    """
    if not pretrain_samples or not finetune_samples:
        raise ValueError("both datasets must be non-empty")
    dim_pre = pretrain_samples[0].values.size
    dim_fine = finetune_samples[0].values.size
    if dim_pre != dim_fine:
        raise ValueError(f"histogram dims differ: {dim_pre} vs {dim_fine}")

    train, test = split_by_class(finetune_samples, cfg.train_per_class,
                                 cfg.test_per_class, cfg.split_seed)
    Xtr, ytr = to_arrays(train)
    Xte, yte = to_arrays(test)
    Xpre, _ = to_arrays(pretrain_samples)

    base = init_random(list(cfg.architecture), cfg.init_scale, cfg.seed)
    curves = []
    for name, pool in (("transfer", Xpre), ("same_set", Xtr)):
        if verbose:
            print(f"variant {name!r}: pre-training on {pool.shape[0]} samples")
        model = pretrain_greedy(base, pool, cfg.pretrain_epochs_per_layer, cfg.cd)
        _, trace = finetune(model, Xtr, ytr, cfg.finetune, eval_data=(Xte, yte))
        curve = LearningCurve.from_trace(
            trace, {"variant": name, "pretrain_pool": pool.shape[0],
                    **_split_meta(len(ytr), len(yte))})
        if cfg.out_dir:
            curve.to_csv(cfg, os.path.join(cfg.out_dir, f"transfer_{name}.csv"))
        curves.append(curve)
    return curves[0], curves[1]
