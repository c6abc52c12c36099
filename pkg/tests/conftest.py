"""Shared fixtures: the seeded synthetic benchmark runs used across test modules.

Also prints one PASS/FAIL line per acceptance criterion at the end of the run.
"""

import re
import time

import numpy as np
import pytest

from deepbow import dbn, harness
from deepbow.dbn import FinetuneConfig
from deepbow.rbm import CdConfig

BENCHMARK_SEEDS = (0, 1, 2, 3, 4)


def benchmark_cd(seed: int) -> CdConfig:
    return CdConfig(learning_rate=1.0, batch_size=100, seed=seed)


def benchmark_ft(seed: int, epochs: int = 100, mode: str = "full_network") -> FinetuneConfig:
    return FinetuneConfig(mode, 0.5, epochs, 20, 0.0002, seed)


class BenchmarkRun:
    """One seed of the desk-scale benchmark: data split plus base/pretrained models."""

    def __init__(self, seed: int, arch=(201, 100, 5), pretrain_epochs=200):
        samples = harness.synth_dataset(harness.SyntheticSpec(), seed)
        train, test = harness.split_by_class(samples, 100, 100, seed)
        self.seed = seed
        self.Xtr, self.ytr = harness.to_arrays(train)
        self.Xte, self.yte = harness.to_arrays(test)
        self.base = dbn.init_random(list(arch), 0.01, seed)
        self.pretrained = dbn.pretrain_greedy(self.base, self.Xtr, pretrain_epochs,
                                              benchmark_cd(seed))


@pytest.fixture(scope="session")
def benchmark_runs():
    """5-seed single-hidden-layer benchmark (201-100-5, 200 pre-training epochs)."""
    t0 = time.monotonic()
    runs = [BenchmarkRun(seed) for seed in BENCHMARK_SEEDS]
    build_seconds = time.monotonic() - t0
    return runs, build_seconds


@pytest.fixture(scope="session")
def deep_benchmark_runs():
    """5-seed three-hidden-layer benchmark (201-100-50-25-5, 400 pre-training epochs)."""
    t0 = time.monotonic()
    runs = [BenchmarkRun(seed, arch=(201, 100, 50, 25, 5), pretrain_epochs=400)
            for seed in BENCHMARK_SEEDS]
    build_seconds = time.monotonic() - t0
    return runs, build_seconds


# ---------------------------------------------------------------------------
# acceptance criterion summary lines

_CRITERION_RE = re.compile(r"test_criterion_(\d+)_(\w+)")
_criterion_outcomes: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = _CRITERION_RE.search(report.nodeid)
    if m:
        _criterion_outcomes[int(m.group(1))] = (m.group(2), report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criterion_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(_criterion_outcomes):
        name, outcome = _criterion_outcomes[num]
        word = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"criterion {num:2d} [{word}] {name}")
