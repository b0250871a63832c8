"""Similarity and contrastive-objective layer.

Cosine similarity matrices between text and video batches, the symmetric
InfoNCE objective evaluated on frozen features (matched pairs on the
diagonal), and the inverted-softmax re-ranking that discounts candidates
which look good to many queries at once.
"""

from __future__ import annotations

import numpy as np

from .core import _as_matrix
from .errors import NumericalError, ShapeError

DEFAULT_TEMPERATURE = 0.01
DEFAULT_INV_TEMPERATURE = 100.0


def cosine_similarity(texts, videos) -> np.ndarray:
    """Pairwise cosine similarities, texts as rows, videos as columns."""
    t = _as_matrix(texts, "texts")
    v = _as_matrix(videos, "videos")
    if t.shape[1] != v.shape[1]:
        raise ShapeError(f"feature dimensions differ: texts {t.shape[1]} vs videos {v.shape[1]}")
    t_norms = np.linalg.norm(t, axis=1)
    v_norms = np.linalg.norm(v, axis=1)
    for name, norms in (("texts", t_norms), ("videos", v_norms)):
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise NumericalError(f"{name} row {zero[0]} has zero norm, cosine undefined")
    return (t / t_norms[:, None]) @ (v / v_norms[:, None]).T


def _log_softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def info_nce(sim, temperature: float = DEFAULT_TEMPERATURE) -> float:
    """Symmetric InfoNCE over a square similarity matrix.

    Positives sit on the diagonal; each direction contrasts them against its
    row (text to video) or column (video to text) and the two cross-entropy
    terms are averaged.  Computed in the log domain with max-subtraction.
    Returns 0 for a 1x1 matrix (a single positive has no negatives).
    """
    s = _as_matrix(sim, "sim")
    if s.shape[0] != s.shape[1]:
        raise ShapeError(f"similarity matrix must be square, got {s.shape}")
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    logits = s / temperature
    t2v = np.diagonal(_log_softmax_rows(logits)).mean()
    v2t = np.diagonal(_log_softmax_rows(logits.T)).mean()
    return float(-0.5 * (t2v + v2t))


def inverted_softmax(sim, inv_temperature: float = DEFAULT_INV_TEMPERATURE) -> np.ndarray:
    """Re-weight similarities by how selectively each candidate is wanted.

    Every entry is multiplied by the softmax, taken over queries within its
    candidate column, of the similarities scaled by ``inv_temperature``.
    Candidates that score high for many queries get their entries shrunk;
    ranking for query ``i`` then uses row ``i`` of the result.
    """
    s = _as_matrix(sim, "sim")
    if not inv_temperature > 0:
        raise ValueError(f"inv_temperature must be > 0, got {inv_temperature}")
    logits = s * inv_temperature
    shifted = np.exp(logits - logits.max(axis=0, keepdims=True))
    weights = shifted / shifted.sum(axis=0, keepdims=True)
    return s * weights
