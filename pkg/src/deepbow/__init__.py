"""Deep belief networks over bag-of-visual-words image histograms.

Core pieces: RBM layers trained by contrastive divergence (`rbm`), an exact
enumeration oracle for tiny models (`oracle`), the stacked classifier with
greedy pre-training and backprop fine-tuning (`dbn`), the image-to-histogram
feature pipeline (`features`), per-neuron explicitness analysis (`analysis`)
and the seeded experiment harness plus CLI (`harness`, `cli`).
"""

__version__ = "0.1.0"

from .rbm import CdConfig, RbmDelta, RbmLayer  # noqa: F401
from .dbn import DbnClassifier, FinetuneConfig  # noqa: F401
from .features import Codebook, Descriptor, GrayImage, HistogramSample, PatchConfig  # noqa: F401
from .harness import ExperimentConfig, LearningCurve, SyntheticSpec  # noqa: F401
