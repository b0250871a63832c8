"""Synthetic cross-modal cluster benchmark and iteration diagnostics.

The generator draws paired two-modality batches whose class structure lives
in a low-dimensional signal subspace while the remaining ambient dimensions
carry pure noise; one modality is additionally shifted by a constant offset
to mimic the systematic gap between embedding spaces.  On top of it sit the
intra/inter-class variance diagnostics, a per-iteration study of the routing
loop, and a PCA rank-k reconstruction baseline for like-for-like comparisons
at matched rank budgets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EmclConfig,
    _as_matrix,
    cold_start_state,
    e_step,
    init_bases,
    m_step,
    normalize_bases,
)
from .errors import ShapeError


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator knobs for one labeled two-modality batch.

    Class centers form a regular simplex with pairwise distance
    ``class_separation`` inside the first ``signal_dim`` coordinates;
    samples add isotropic noise of scale ``signal_sigma`` there.  The
    remaining ``ambient_dim - signal_dim`` coordinates are filled with
    ``noise_sigma`` Gaussian noise.  Modality B rows are shifted by a
    constant vector of L2 length ``modality_offset``.
    """

    num_classes: int = 3
    per_class: int = 40
    ambient_dim: int = 16
    signal_dim: int = 3
    class_separation: float = 3.0
    signal_sigma: float = 0.3
    noise_sigma: float = 2.0
    modality_offset: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 1 or self.per_class < 1:
            raise ValueError("num_classes and per_class must be >= 1")
        if not 1 <= self.signal_dim <= self.ambient_dim:
            raise ValueError(f"need 1 <= signal_dim <= ambient_dim, got {self.signal_dim}/{self.ambient_dim}")
        if self.num_classes > self.signal_dim:
            raise ValueError("simplex centers need num_classes <= signal_dim")
        if not self.class_separation > 0:
            raise ValueError("class_separation must be > 0")
        if self.signal_sigma < 0 or self.noise_sigma < 0 or self.modality_offset < 0:
            raise ValueError("noise scales and modality_offset must be >= 0")


@dataclass(frozen=True)
class LabeledBatch:
    """Stacked features (modality A rows, then modality B rows) with per-row labels."""

    features: np.ndarray  # (rows, ambient_dim)
    labels: np.ndarray    # (rows,) class index
    modality: np.ndarray  # (rows,) 0 for modality A, 1 for modality B

    def __post_init__(self):
        feats = _as_matrix(self.features, "features")
        labels = np.asarray(self.labels, dtype=np.int64)
        modality = np.asarray(self.modality, dtype=np.int64)
        if labels.shape != (feats.shape[0],) or modality.shape != (feats.shape[0],):
            raise ShapeError("labels and modality must have one entry per feature row")
        if not (np.any(modality == 0) and np.any(modality == 1)):
            raise ValueError("both modalities must be present")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "modality", modality)


@dataclass(frozen=True)
class VarianceTrace:
    """Per-iteration diagnostics; index 0 is the raw input, so length is T+1.

    ``basis_change`` holds the Frobenius norm of the basis update at each
    step (NaN at index 0, where no update has happened yet).
    """

    intra: np.ndarray
    inter: np.ndarray
    numerical_rank: np.ndarray
    basis_change: np.ndarray

    def __len__(self) -> int:
        return self.intra.shape[0]


def simplex_centers(num_classes: int, dim: int, separation: float) -> np.ndarray:
    """Regular simplex of class centers with pairwise distance ``separation``.

    Built on scaled coordinate axes and recentred on the origin; requires
    num_classes <= dim.
    """
    if num_classes > dim:
        raise ShapeError(f"cannot place {num_classes} equidistant centers in {dim} dimensions")
    centers = np.zeros((num_classes, dim))
    scale = separation / np.sqrt(2.0)
    centers[np.arange(num_classes), np.arange(num_classes)] = scale
    return centers - centers.mean(axis=0)


def generate(spec: SyntheticSpec) -> LabeledBatch:
    """Draw one labeled batch, deterministic given the spec's seed."""
    rng = np.random.default_rng(spec.seed)
    centers = simplex_centers(spec.num_classes, spec.signal_dim, spec.class_separation)
    rows_per_modality = spec.num_classes * spec.per_class
    labels_block = np.repeat(np.arange(spec.num_classes), spec.per_class)
    offset = spec.modality_offset * np.ones(spec.ambient_dim) / np.sqrt(spec.ambient_dim)

    blocks = []
    for modality in range(2):
        feats = np.zeros((rows_per_modality, spec.ambient_dim))
        feats[:, : spec.signal_dim] = centers[labels_block] + spec.signal_sigma * rng.standard_normal(
            (rows_per_modality, spec.signal_dim)
        )
        feats[:, spec.signal_dim :] = spec.noise_sigma * rng.standard_normal(
            (rows_per_modality, spec.ambient_dim - spec.signal_dim)
        )
        if modality == 1:
            feats += offset
        blocks.append(feats)

    return LabeledBatch(
        features=np.vstack(blocks),
        labels=np.concatenate([labels_block, labels_block]),
        modality=np.repeat([0, 1], rows_per_modality),
    )


def _variance_diagnostics(features: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("variance diagnostics need at least 2 classes")
    centroids = np.stack([features[labels == c].mean(axis=0) for c in classes])
    intra = float(
        np.mean([np.mean(np.sum((features[labels == c] - centroids[i]) ** 2, axis=1))
                 for i, c in enumerate(classes)])
    )
    pair_sq = []
    for i in range(classes.size):
        for j in range(i + 1, classes.size):
            pair_sq.append(np.sum((centroids[i] - centroids[j]) ** 2))
    return intra, float(np.mean(pair_sq))


def variance_diagnostics(batch: LabeledBatch) -> tuple[float, float]:
    """Within-class scatter and mean squared centroid separation.

    ``intra`` averages, over classes, the mean squared distance of class
    members (both modalities pooled) to their class centroid; ``inter`` is
    the mean squared pairwise distance between class centroids.  Both are
    invariant under a common translation of all rows.
    """
    counts = np.bincount(batch.labels)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise ValueError(f"classes without members: {empty.tolist()}")
    return _variance_diagnostics(batch.features, batch.labels)


def numerical_rank(matrix, rel_tol: float = 1e-6) -> int:
    """Count singular values above ``rel_tol`` times the largest one."""
    m = _as_matrix(matrix, "matrix")
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def run_iteration_study(
    batch: LabeledBatch, config: EmclConfig, iterations: int | None = None
) -> VarianceTrace:
    """Trace variance and rank diagnostics through the routing iterations.

    Starts from a cold-start state seeded by ``config.seed``, reconstructs
    the batch after every E/M/normalize round, and records intra/inter
    variance, the numerical rank of the reconstruction, and the Frobenius
    norm of the basis update.  ``iterations`` overrides ``config.iters``
    (0 yields just the raw-input record).
    """
    steps = config.iters if iterations is None else iterations
    if steps < 0:
        raise ValueError(f"iterations must be >= 0, got {steps}")
    x = batch.features
    state = cold_start_state(config.k, x.shape[0], config.seed, config.alpha)
    bases = init_bases(state, x.shape[0])

    intra = np.empty(steps + 1)
    inter = np.empty(steps + 1)
    ranks = np.empty(steps + 1, dtype=np.int64)
    change = np.full(steps + 1, np.nan)

    intra[0], inter[0] = _variance_diagnostics(x, batch.labels)
    ranks[0] = numerical_rank(x)

    for t in range(1, steps + 1):
        y = e_step(x, bases, config)
        updated = normalize_bases(m_step(x, y, config))
        change[t] = float(np.linalg.norm(updated - bases))
        bases = updated
        recon = bases @ y.T
        intra[t], inter[t] = _variance_diagnostics(recon, batch.labels)
        ranks[t] = numerical_rank(recon)

    return VarianceTrace(intra=intra, inter=inter, numerical_rank=ranks, basis_change=change)


def pca_project(batch: LabeledBatch, k: int) -> np.ndarray:
    """Rank-k PCA reconstruction of the batch features in ambient space.

    Centers the rows, keeps the top-k principal directions, and maps back,
    so the result is directly comparable with the routing reconstruction at
    a matched rank budget.
    """
    x = batch.features
    if not 1 <= k <= min(x.shape):
        raise ShapeError(f"need 1 <= k <= min{x.shape}, got k={k}")
    mean = x.mean(axis=0)
    centered = x - mean
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    return mean + (u[:, :k] * s[:k]) @ vt[:k]
