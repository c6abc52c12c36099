"""Command-line entry point.

Subcommands: features, pretrain, finetune, eval, analyze, sweep, transfer,
synth. Every subcommand takes --seed, --config and --out. Exit codes: 0 on
success, 1 on validation/usage errors, 2 on runtime failures.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis, dbn, features, harness


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override the experiment seed")
    p.add_argument("--config", default=None, help="flat key = value config file")
    p.add_argument("--out", default=None, help="output directory")


def _resolve_config(args, kind: str | None = None) -> harness.ExperimentConfig:
    raw = harness.read_raw_config(args.config) if args.config else {}
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    if args.out is not None:
        raw["out_dir"] = args.out
    if kind is not None:
        raw.setdefault("kind", kind)
    return harness.build_config(raw, source=args.config or "<flags>")


def _require_out(args) -> str:
    out = args.out
    if out is None:
        raise ValueError("--out is required for this subcommand")
    os.makedirs(out, exist_ok=True)
    return out


def _save_model(model, path) -> None:
    harness.write_atomic_bytes(path, dbn.serialize(model))


# ---------------------------------------------------------------------------
# subcommand implementations

def _cmd_synth(args) -> int:
    out = _require_out(args)
    cfg = _resolve_config(args)
    samples = harness.synth_dataset(cfg.synthetic, cfg.seed)
    path = os.path.join(out, "dataset.csv")
    harness.save_histogram_dataset(samples, path)
    print(f"wrote {len(samples)} samples to {path}")
    return 0


def _collect_images(root: str) -> list[tuple[str, int | None]]:
    subdirs = sorted(d for d in os.listdir(root)
                     if os.path.isdir(os.path.join(root, d)))
    found: list[tuple[str, int | None]] = []
    if subdirs:
        for label, d in enumerate(subdirs):
            sub = os.path.join(root, d)
            for f in sorted(os.listdir(sub)):
                if f.endswith(".pgm"):
                    found.append((os.path.join(sub, f), label))
    else:
        for f in sorted(os.listdir(root)):
            if f.endswith(".pgm"):
                found.append((os.path.join(root, f), None))
    if not found:
        raise ValueError(f"no .pgm images under {root}")
    return found


def _cmd_features(args) -> int:
    out = _require_out(args)
    entries = _collect_images(args.images)
    patch_cfg = features.PatchConfig(args.patch_size, args.spacing, args.variance_threshold)
    images = [(features.read_pgm(path), label) for path, label in entries]

    if args.codebook:
        cb = features.load_codebook(args.codebook)
    else:
        descriptors = []
        for img, _ in images:
            for p in features.extract_patch_pyramid(img, patch_cfg):
                descriptors.append(
                    features.describe_patch(p.pixels, patch_cfg.variance_threshold))
        seed = 0 if args.seed is None else args.seed
        cb = features.kmeans_codebook(descriptors, args.k, seed=seed,
                                      max_iters=args.kmeans_iters)
        cb_path = args.save_codebook or os.path.join(out, "codebook.cbk")
        features.save_codebook(cb, cb_path)
        print(f"built codebook K={cb.k}, saved to {cb_path}")

    samples = [features.image_histogram(img, cb, patch_cfg, args.grid, args.sigma, label)
               for img, label in images]
    path = os.path.join(out, "histograms.csv")
    harness.save_histogram_dataset(samples, path)
    print(f"wrote {len(samples)} histograms to {path}")
    return 0


def _split_config_data(cfg):
    samples = harness._load_experiment_data(cfg)
    train, test = harness.split_by_class(samples, cfg.train_per_class,
                                         cfg.test_per_class, cfg.split_seed)
    return harness.to_arrays(train), harness.to_arrays(test)


def _cmd_pretrain(args) -> int:
    out = _require_out(args)
    cfg = _resolve_config(args)
    (Xtr, _), _ = _split_config_data(cfg)
    model = dbn.init_random(list(cfg.architecture), cfg.init_scale, cfg.seed)
    model = dbn.pretrain_greedy(model, Xtr, cfg.pretrain_epochs_per_layer, cfg.cd)
    path = os.path.join(out, "model.dbnm")
    _save_model(model, path)
    print(f"pre-trained {list(cfg.architecture)} for "
          f"{cfg.pretrain_epochs_per_layer} epochs/layer; saved to {path}")
    return 0


def _cmd_finetune(args) -> int:
    out = _require_out(args)
    cfg = _resolve_config(args)
    model = dbn.load_model(args.model)
    (Xtr, ytr), (Xte, yte) = _split_config_data(cfg)
    model, trace = dbn.finetune(model, Xtr, ytr, cfg.finetune, eval_data=(Xte, yte))
    path = os.path.join(out, "model_finetuned.dbnm")
    _save_model(model, path)
    curve = harness.LearningCurve.from_trace(trace, {"variant": cfg.finetune.mode})
    curve.to_csv(cfg, os.path.join(out, "finetune_trace.csv"))
    print(f"fine-tuned for {cfg.finetune.epochs} epochs "
          f"(mode {cfg.finetune.mode}); saved to {path}")
    print(f"error_rate={dbn.error_rate(model, Xte, yte):.17g}")
    return 0


def _cmd_eval(args) -> int:
    model = dbn.load_model(args.model)
    samples = harness.load_histogram_dataset(args.data)
    X, y = harness.to_arrays(samples)
    if (y < 0).any():
        raise ValueError("eval requires a fully labeled dataset")
    print(f"error_rate={dbn.error_rate(model, X, y):.17g}")
    return 0


def _cmd_analyze(args) -> int:
    out = _require_out(args)
    model = dbn.load_model(args.model)
    samples = harness.load_histogram_dataset(args.data)
    X, y = harness.to_arrays(samples)
    if (y < 0).any():
        raise ValueError("analyze requires a fully labeled dataset")
    am = analysis.layer_activities(model, X, y, args.layer)
    report = analysis.best_neurons(am)
    report_path = os.path.join(out, f"explicitness_layer{args.layer}.csv")
    analysis.export_report_csv(report, report_path)

    act_lines = ["label," + ",".join(f"a{i}" for i in range(am.activities.shape[1]))]
    for i in range(am.activities.shape[0]):
        row = ",".join(f"{v:.17g}" for v in am.activities[i])
        act_lines.append(f"{am.labels[i]},{row}")
    harness._write_atomic(os.path.join(out, f"activities_layer{args.layer}.csv"),
                          "\n".join(act_lines) + "\n")
    for ci, cat in enumerate(report.categories):
        j = report.best_neuron[ci]
        print(f"category {cat}: best neuron {j}, score {report.scores[ci, j]:.4f}")
    print(f"wrote {report_path}")
    return 0


def _cmd_sweep(args) -> int:
    _require_out(args)
    cfg = _resolve_config(args)
    if cfg.kind == "learning_curve":
        curves = harness.run_learning_curve(cfg, verbose=True)
        for name, curve in curves.items():
            print(f"{name}: final test error {curve.test_error[-1]:.4f}")
    elif cfg.kind == "pretrain_sweep":
        for epochs, err in harness.sweep_pretrain_epochs(cfg, verbose=True):
            print(f"pretrain_epochs={epochs}: test error {err:.4f}")
    elif cfg.kind == "labeled_size_sweep":
        for size, err_p, err_r in harness.sweep_labeled_size(cfg, verbose=True):
            print(f"size={size}: pretrained {err_p:.4f}, random {err_r:.4f}")
    else:
        raise ValueError(f"kind {cfg.kind!r} is not a sweep; use the transfer subcommand")
    return 0


def _cmd_transfer(args) -> int:
    _require_out(args)
    cfg = _resolve_config(args, kind="transfer")
    if cfg.pretrain_dataset is None or cfg.dataset is None:
        raise ValueError("transfer needs both pretrain_dataset and dataset paths")
    cfg.validate_paths()
    pre = harness.load_histogram_dataset(cfg.pretrain_dataset)
    fine = harness.load_histogram_dataset(cfg.dataset)
    transfer, same = harness.run_transfer(cfg, pre, fine, verbose=True)
    print(f"transfer: final test error {transfer.test_error[-1]:.4f}")
    print(f"same_set: final test error {same.test_error[-1]:.4f}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deepbow",
                     description="Deep belief networks over visual-word histograms")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[], help="generate a synthetic histogram dataset")
    _common_flags(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("features", help="turn PGM images into a histogram CSV")
    _common_flags(p)
    p.add_argument("--images", required=True, help="directory of .pgm files "
                   "(class subdirectories give labels)")
    p.add_argument("--k", type=int, default=200, help="vocabulary size")
    p.add_argument("--grid", type=int, default=1, choices=(1, 2, 4))
    p.add_argument("--patch-size", type=int, default=16)
    p.add_argument("--spacing", type=int, default=8)
    p.add_argument("--variance-threshold", type=float, default=1e-4)
    p.add_argument("--sigma", type=float, default=0.25, help="cell smoothing width")
    p.add_argument("--kmeans-iters", type=int, default=50)
    p.add_argument("--codebook", default=None, help="use an existing codebook file")
    p.add_argument("--save-codebook", default=None)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("pretrain", help="greedy layer-wise CD pre-training")
    _common_flags(p)
    p.set_defaults(func=_cmd_pretrain)

    p = sub.add_parser("finetune", help="supervised fine-tuning of a saved model")
    _common_flags(p)
    p.add_argument("--model", required=True, help=".dbnm model file")
    p.set_defaults(func=_cmd_finetune)

    p = sub.add_parser("eval", help="error rate of a model on a dataset")
    _common_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="histogram CSV")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("analyze", help="per-neuron explicitness report")
    _common_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--layer", type=int, default=1, help="hidden layer index (0 = raw input)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("sweep", help="learning-curve / pretrain-epoch / labeled-size sweeps")
    _common_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("transfer", help="transfer vs same-set pre-training")
    _common_flags(p)
    p.set_defaults(func=_cmd_transfer)
    return parser


def cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli())
