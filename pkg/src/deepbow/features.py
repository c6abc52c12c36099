"""Image-to-histogram pipeline.

Multi-scale patch pyramid over a grayscale image, 4x4x8 gradient-orientation
descriptors, a k-means visual vocabulary with one extra word for low-variance
patches, and spatially gridded normalized histograms with Gaussian
cell smoothing. Images come in as binary PGM (P5).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DESCRIPTOR_CELLS = 4
DESCRIPTOR_BINS = 8
DESCRIPTOR_DIM = DESCRIPTOR_CELLS * DESCRIPTOR_CELLS * DESCRIPTOR_BINS  # 128
DESCRIPTOR_CLAMP = 0.2

CODEBOOK_MAGIC = b"CBK1"


class CodebookFormatError(ValueError):
    """Raised for malformed codebook streams."""


@dataclass(eq=False)
class GrayImage:
    """Grayscale image, pixels (height, width) with values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if not np.isfinite(self.pixels).all():
            raise ValueError("non-finite pixel values")
        if self.pixels.min() < 0.0 or self.pixels.max() > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def read_pgm(path) -> GrayImage:
    """Load a binary (P5) PGM with maxval <= 255, scaled to [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # header = magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments running to end of line
    tokens = []
    pos = 2
    while len(tokens) < 3:
        m = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\d+)").match(data, pos)
        if m is None:
            raise ValueError(f"{path}: malformed PGM header")
        tokens.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = tokens
    if not 0 < maxval <= 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos:pos + width * height]
    if len(raster) < width * height:
        raise ValueError(f"{path}: truncated raster")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width) / maxval
    return GrayImage(pixels)


def write_pgm(img: GrayImage, path) -> None:
    raster = np.clip(np.rint(img.pixels * 255), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.width} {img.height}\n255\n".encode())
        fh.write(raster.tobytes())


@dataclass(frozen=True)
class PatchConfig:
    """Dense sampling parameters: patch side, grid spacing, low-variance cutoff."""

    patch_size: int = 16
    grid_spacing: int = 8
    variance_threshold: float = 1e-4

    def __post_init__(self):
        if self.patch_size < 4:
            raise ValueError("patch_size must be >= 4")
        if self.grid_spacing < 1:
            raise ValueError("grid_spacing must be >= 1")
        if self.variance_threshold < 0:
            raise ValueError("variance_threshold must be >= 0")


class Patch(NamedTuple):
    pixels: np.ndarray
    center: tuple[float, float]  # (row, col) in original-image coordinates
    level: int


def box_downsample(pixels: np.ndarray) -> np.ndarray:
    """Halve both dims by averaging 2x2 blocks (odd trailing row/col dropped)."""
    h2, w2 = pixels.shape[0] // 2, pixels.shape[1] // 2
    p = pixels[:2 * h2, :2 * w2]
    return 0.25 * (p[0::2, 0::2] + p[0::2, 1::2] + p[1::2, 0::2] + p[1::2, 1::2])


def extract_patch_pyramid(img: GrayImage, cfg: PatchConfig) -> list[Patch]:
    """Dense patches at every pyramid level.

    Level 0 is the original image; each next level is box-downsampled by two.
    Patches sit on a regular grid of cfg.grid_spacing, and levels stop once a
    full patch no longer fits. Centers are reported in original-image
    coordinates (a level-t pixel covers a 2^t block of original pixels).
    """
    n, spacing = cfg.patch_size, cfg.grid_spacing
    if img.height < n or img.width < n:
        raise ValueError(f"image {img.height}x{img.width} smaller than one {n}x{n} patch")
    patches = []
    pixels = img.pixels
    level = 0
    while pixels.shape[0] >= n and pixels.shape[1] >= n:
        scale = 2 ** level
        half = (n - 1) / 2.0
        for r in range(0, pixels.shape[0] - n + 1, spacing):
            for c in range(0, pixels.shape[1] - n + 1, spacing):
                center = ((r + half) * scale + (scale - 1) / 2.0,
                          (c + half) * scale + (scale - 1) / 2.0)
                patches.append(Patch(pixels[r:r + n, c:c + n], center, level))
        pixels = box_downsample(pixels)
        level += 1
    return patches


@dataclass(eq=False)
class Descriptor:
    """128-d gradient-orientation descriptor; zero vector when flagged low-variance."""

    values: np.ndarray
    low_variance: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (DESCRIPTOR_DIM,):
            raise ValueError(f"descriptor must have {DESCRIPTOR_DIM} entries")
        if np.isnan(self.values).any():
            raise ValueError("NaN descriptor entries")


def describe_patch(patch: np.ndarray, variance_threshold: float) -> Descriptor:
    """Orientation histogram over a 4x4 cell grid, SIFT-style normalized.

    Flat patches (pixel variance below the threshold) are flagged low-variance
    and get a zero vector. Otherwise: finite-difference gradients, 8
    magnitude-weighted orientation bins per cell, L2 normalization, entries
    clamped at 0.2, renormalized.
    """
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim != 2 or patch.shape[0] != patch.shape[1]:
        raise ValueError("patch must be square")
    side = patch.shape[0]
    if side < 4:
        raise ValueError("patch side must be >= 4")

    if patch.var() < variance_threshold:
        return Descriptor(np.zeros(DESCRIPTOR_DIM), low_variance=True)

    gr, gc = np.gradient(patch)
    mag = np.hypot(gr, gc)
    ori = np.arctan2(gr, gc)  # [-pi, pi]
    bins = np.floor((ori + np.pi) / (2 * np.pi / DESCRIPTOR_BINS)).astype(np.int64)
    bins %= DESCRIPTOR_BINS  # angle exactly +pi wraps to bin 0

    idx = np.arange(side)
    cell = np.minimum(idx * DESCRIPTOR_CELLS // side, DESCRIPTOR_CELLS - 1)
    hist = np.zeros((DESCRIPTOR_CELLS, DESCRIPTOR_CELLS, DESCRIPTOR_BINS))
    flat_cell = (cell[:, None] * DESCRIPTOR_CELLS + cell[None, :]).ravel()
    np.add.at(hist.reshape(-1, DESCRIPTOR_BINS), (flat_cell, bins.ravel()), mag.ravel())

    vec = hist.ravel()
    norm = np.linalg.norm(vec)
    if norm == 0.0:  # non-flat but gradient-free patch; treat as featureless
        return Descriptor(np.zeros(DESCRIPTOR_DIM), low_variance=True)
    vec = np.minimum(vec / norm, DESCRIPTOR_CLAMP)
    return Descriptor(vec / np.linalg.norm(vec))


@dataclass(eq=False)
class Codebook:
    """K centroid descriptors; quantization index K is reserved for low-variance."""

    centroids: np.ndarray

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        if self.centroids.ndim != 2 or self.centroids.shape[0] < 1:
            raise ValueError("centroids must be a non-empty 2-D array")
        if np.isnan(self.centroids).any():
            raise ValueError("NaN centroid entries")

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


def _descriptor_matrix(descriptors) -> np.ndarray:
    if isinstance(descriptors, np.ndarray):
        return np.asarray(descriptors, dtype=np.float64)
    rows = [d.values for d in descriptors if not d.low_variance]
    return np.array(rows, dtype=np.float64).reshape(len(rows), -1)


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (n, k) squared Euclidean distances
    return (np.sum(points ** 2, axis=1)[:, None]
            - 2.0 * points @ centroids.T
            + np.sum(centroids ** 2, axis=1)[None, :])


def kmeans_codebook(descriptors, k: int, seed: int = 0, max_iters: int = 100) -> Codebook:
    """Lloyd's k-means from k-means++ seeding, deterministic for a fixed seed.

    Low-variance descriptors are excluded. Empty clusters get reseeded to the
    point currently farthest from its assigned centroid. Stops when the
    assignment is unchanged or after max_iters.
    """
    points = _descriptor_matrix(descriptors)
    if points.shape[0] < k:
        raise ValueError(f"need at least {k} usable descriptors, got {points.shape[0]}")
    if k < 1:
        raise ValueError("k must be positive")
    rng = np.random.default_rng(seed)
    n = points.shape[0]

    # k-means++ seeding
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = _sq_dists(points, centroids[:1]).ravel()
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centroids[j] = points[rng.integers(n)]
        else:
            centroids[j] = points[np.searchsorted(np.cumsum(d2 / total), rng.random())]
        d2 = np.minimum(d2, _sq_dists(points, centroids[j:j + 1]).ravel())

    assign = np.full(n, -1)
    for _ in range(max_iters):
        dist = _sq_dists(points, centroids)
        new_assign = np.argmin(dist, axis=1)
        nearest = dist[np.arange(n), new_assign]
        for j in range(k):
            members = new_assign == j
            if members.any():
                centroids[j] = points[members].mean(axis=0)
            else:
                far = int(np.argmax(nearest))
                centroids[j] = points[far]
                new_assign[far] = j
                nearest[far] = 0.0
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    return Codebook(centroids)


def kmeans_objective(points, cb: Codebook) -> float:
    """Sum of squared distances to the nearest centroid."""
    points = _descriptor_matrix(points)
    return float(_sq_dists(points, cb.centroids).min(axis=1).sum())


def quantize(d: Descriptor, cb: Codebook) -> int:
    """Nearest-centroid word index; index K for low-variance, ties to the lowest index."""
    if d.low_variance:
        return cb.k
    if d.values.size != cb.dim:
        raise ValueError(f"descriptor dim {d.values.size} != codebook dim {cb.dim}")
    return int(np.argmin(_sq_dists(d.values[None, :], cb.centroids)))


def save_codebook(cb: Codebook, path) -> None:
    import struct
    with open(path, "wb") as fh:
        fh.write(CODEBOOK_MAGIC)
        fh.write(struct.pack("<II", cb.k, cb.dim))
        fh.write(np.ascontiguousarray(cb.centroids, dtype="<f8").tobytes())


def load_codebook(path) -> Codebook:
    import struct
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CODEBOOK_MAGIC:
        raise CodebookFormatError(f"bad magic {blob[:4]!r} at offset 0")
    if len(blob) < 12:
        raise CodebookFormatError("truncated codebook header")
    k, dim = struct.unpack("<II", blob[4:12])
    need = 12 + 8 * k * dim
    if len(blob) != need:
        raise CodebookFormatError(f"codebook size {len(blob)} != expected {need}")
    cents = np.frombuffer(blob[12:], dtype="<f8").astype(np.float64).reshape(k, dim)
    return Codebook(cents)


@dataclass(eq=False)
class HistogramSample:
    """Normalized visual-word histogram of length grid^2 * K + 1 (+1 = low-variance bin)."""

    values: np.ndarray
    label: int | None = None
    grid: int = 1

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("histogram values must be 1-D")
        if self.grid not in (1, 2, 4):
            raise ValueError("grid must be 1, 2 or 4")
        if (self.values.size - 1) % (self.grid ** 2) != 0 or self.values.size < 2:
            raise ValueError(f"length {self.values.size} is not grid^2 * K + 1")
        if self.values.min() < 0.0:
            raise ValueError("histogram entries must be non-negative")
        if abs(self.values.sum() - 1.0) > 1e-9:
            raise ValueError(f"histogram sums to {self.values.sum()!r}, not 1")
        if self.label is not None:
            self.label = int(self.label)

    @property
    def k(self) -> int:
        return (self.values.size - 1) // (self.grid ** 2)


def build_histogram(words, img_shape: tuple[int, int], k: int, grid: int = 1,
                    smoothing_sigma: float = 0.25) -> HistogramSample:
    """Spatially gridded word histogram with Gaussian soft cell assignment.

    ``words`` is a list of (word_index, (row, col)) with index K meaning
    low-variance. Each ordinary word spreads unit mass over the grid cells
    with Gaussian weights on the distance from the patch center to each cell
    center (std = smoothing_sigma * cell width; sigma <= 0 degenerates to the
    nearest cell). Low-variance words land in the single global extra bin.
    The result is divided by the patch count, so it sums to one.
    """
    if grid not in (1, 2, 4):
        raise ValueError("grid must be 1, 2 or 4")
    if not words:
        raise ValueError("empty word list")
    height, width = img_shape
    cell_h, cell_w = height / grid, width / grid
    centers_r = (np.arange(grid) + 0.5) * cell_h
    centers_c = (np.arange(grid) + 0.5) * cell_w

    values = np.zeros(grid * grid * k + 1)
    for word, (row, col) in words:
        if not 0 <= word <= k:
            raise ValueError(f"word index {word} outside [0, {k}]")
        if word == k:
            values[-1] += 1.0
            continue
        d2 = (centers_r[:, None] - row) ** 2 + (centers_c[None, :] - col) ** 2
        if smoothing_sigma > 0.0:
            w = np.exp(-d2 / (2.0 * (smoothing_sigma * cell_w) ** 2))
            total = w.sum()
            if total > 0.0:
                w /= total
            else:  # all weights underflowed; fall back to the nearest cell
                w = np.zeros_like(d2)
                w.flat[np.argmin(d2)] = 1.0
        else:
            w = np.zeros_like(d2)
            w.flat[np.argmin(d2)] = 1.0
        cells = (np.arange(grid)[:, None] * grid + np.arange(grid)[None, :])
        np.add.at(values, cells.ravel() * k + word, w.ravel())
    values /= len(words)
    return HistogramSample(values, label=None, grid=grid)


def image_histogram(img: GrayImage, cb: Codebook, patch_cfg: PatchConfig,
                    grid: int = 1, smoothing_sigma: float = 0.25,
                    label: int | None = None) -> HistogramSample:
    """Full pipeline for one image: pyramid -> descriptors -> words -> histogram."""
    patches = extract_patch_pyramid(img, patch_cfg)
    words = [(quantize(describe_patch(p.pixels, patch_cfg.variance_threshold), cb), p.center)
             for p in patches]
    sample = build_histogram(words, (img.height, img.width), cb.k, grid, smoothing_sigma)
    sample.label = label if label is None else int(label)
    return sample
