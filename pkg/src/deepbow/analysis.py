"""Per-neuron category discrimination.

A neuron's performance parameter for a category is the threshold-maximized
average of the true-positive and true-negative rates of the rule "activity
above (or below) threshold means the image is from the category". Both
orientations are tried, so the score lives in [0.5, 1] and is unchanged by
flipping an activity to 1 - a.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .dbn import DbnClassifier, init_random

ABOVE = "above"   # activity above threshold means in-category
BELOW = "below"


@dataclass(eq=False)
class ActivityMatrix:
    """Neuron activities (n_samples, n_neurons) in [0,1]; layer 0 is the raw input."""

    activities: np.ndarray
    labels: np.ndarray
    layer_index: int

    def __post_init__(self):
        self.activities = np.asarray(self.activities, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.activities.ndim != 2:
            raise ValueError("activities must be 2-D")
        if self.labels.shape != (self.activities.shape[0],):
            raise ValueError("one label per activity row required")
        if not np.isfinite(self.activities).all():
            raise ValueError("non-finite activities")
        if self.activities.size and (self.activities.min() < 0 or self.activities.max() > 1):
            raise ValueError("activities must lie in [0, 1]")
        if self.layer_index < 0:
            raise ValueError("layer_index must be >= 0")


@dataclass(eq=False)
class ExplicitnessReport:
    """Per (category, neuron) score/threshold/orientation plus each category's best neuron."""

    categories: np.ndarray          # (c,) class indices, ascending
    scores: np.ndarray              # (c, m) in [0.5, 1]
    thresholds: np.ndarray          # (c, m)
    orientations: np.ndarray        # (c, m) of ABOVE/BELOW strings
    best_neuron: np.ndarray         # (c,) neuron index with the top score, ties low
    layer_index: int = 0

    @property
    def best_scores(self) -> np.ndarray:
        return self.scores[np.arange(len(self.categories)), self.best_neuron]


def layer_activities(model: DbnClassifier, X: np.ndarray, y: np.ndarray,
                     layer_index: int) -> ActivityMatrix:
    """Mean-field activities at a hidden layer (0 returns the inputs untouched)."""
    if not 0 <= layer_index <= model.n_hidden_layers:
        raise ValueError(
            f"layer_index must be in [0, {model.n_hidden_layers}], got {layer_index}")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_input:
        raise ValueError("data does not match model input size")
    a = X
    for layer in model.rbm_layers[:layer_index]:
        a = expit(layer.hidden_bias + a @ layer.weights.T)
    return ActivityMatrix(a.copy(), np.asarray(y), layer_index)


def performance_parameter(activity: np.ndarray,
                          in_category: np.ndarray) -> tuple[float, float, str]:
    """Best (TPR + TNR) / 2 over thresholds and both orientations.

    Candidate thresholds are the midpoints between consecutive distinct
    activity values plus one sentinel below the minimum and one above the
    maximum. Ties break to the lower threshold, then to the ABOVE orientation.
    """
    activity = np.asarray(activity, dtype=np.float64)
    in_category = np.asarray(in_category, dtype=bool)
    if activity.shape != in_category.shape or activity.ndim != 1:
        raise ValueError("activity and in_category must be 1-D of equal length")
    n_in = int(in_category.sum())
    n_out = activity.size - n_in
    if n_in == 0 or n_out == 0:
        raise ValueError("both classes must be non-empty")

    distinct = np.unique(activity)
    thresholds = np.concatenate((
        [distinct[0] - 1.0],
        (distinct[:-1] + distinct[1:]) / 2.0,
        [distinct[-1] + 1.0]))
    in_sorted = np.sort(activity[in_category])
    out_sorted = np.sort(activity[~in_category])
    in_below = np.searchsorted(in_sorted, thresholds)
    out_below = np.searchsorted(out_sorted, thresholds)

    # both orientations from the same counts; computing "below" from counts
    # (not as 1 - above) makes the x -> 1-x flip land on bit-identical scores
    score_above = 0.5 * ((n_in - in_below) / n_in + out_below / n_out)
    score_below = 0.5 * (in_below / n_in + (n_out - out_below) / n_out)
    score = np.maximum(score_above, score_below)
    best = int(np.argmax(score))  # first max = lowest threshold
    orientation = ABOVE if score_above[best] >= score_below[best] else BELOW
    return float(score[best]), float(thresholds[best]), orientation


def best_neurons(am: ActivityMatrix) -> ExplicitnessReport:
    """Performance parameter of every neuron against every category."""
    categories = np.unique(am.labels)
    if categories.size < 2:
        raise ValueError("need at least 2 distinct labels")
    n_neurons = am.activities.shape[1]
    scores = np.zeros((categories.size, n_neurons))
    thresholds = np.zeros_like(scores)
    orientations = np.empty(scores.shape, dtype=object)
    for ci, cat in enumerate(categories):
        mask = am.labels == cat
        for j in range(n_neurons):
            s, t, o = performance_parameter(am.activities[:, j], mask)
            scores[ci, j] = s
            thresholds[ci, j] = t
            orientations[ci, j] = o
    best = np.argmax(scores, axis=1)  # ties to the lowest neuron index
    return ExplicitnessReport(categories, scores, thresholds, orientations, best,
                              layer_index=am.layer_index)


def flip_polarity(am: ActivityMatrix) -> tuple[ActivityMatrix, float]:
    """Replace a by 1-a for neurons with mean activity > 0.5; returns the flipped fraction."""
    acts = am.activities.copy()
    flipped = acts.mean(axis=0) > 0.5
    acts[:, flipped] = 1.0 - acts[:, flipped]
    frac = float(flipped.mean()) if flipped.size else 0.0
    return ActivityMatrix(acts, am.labels.copy(), am.layer_index), frac


def input_baseline(X: np.ndarray, y: np.ndarray) -> ExplicitnessReport:
    """Explicitness of the raw histogram dimensions themselves (layer 0)."""
    X = np.asarray(X, dtype=np.float64)
    return best_neurons(ActivityMatrix(X, np.asarray(y), 0))


def random_control(layer_sizes, X: np.ndarray, y: np.ndarray, seed: int,
                   scale: float = 0.01) -> ExplicitnessReport:
    """Explicitness at the top hidden layer of an untrained random model."""
    model = init_random(layer_sizes, scale, seed)
    if model.n_hidden_layers == 0:
        raise ValueError("random control needs at least one hidden layer")
    am = layer_activities(model, X, y, model.n_hidden_layers)
    return best_neurons(am)


def export_report_csv(report: ExplicitnessReport, path) -> None:
    """Rows `category,neuron,score,threshold,orientation`, then a commented best-neuron block."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "neuron", "score", "threshold", "orientation"])
        for ci, cat in enumerate(report.categories):
            for j in range(report.scores.shape[1]):
                writer.writerow([int(cat), j, f"{report.scores[ci, j]:.17g}",
                                 f"{report.thresholds[ci, j]:.17g}",
                                 report.orientations[ci, j]])
        fh.write("# best neurons per category\n")
        fh.write("# category,neuron,score\n")
        for ci, cat in enumerate(report.categories):
            j = report.best_neuron[ci]
            fh.write(f"# {int(cat)},{int(j)},{report.scores[ci, j]:.17g}\n")
