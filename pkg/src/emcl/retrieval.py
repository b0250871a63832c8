"""Ranking metrics over similarity matrices: Recall@K and Median Rank.

Ranks are 1-based and ties are broken pessimistically: candidates tied with
the correct one count as ranked ahead of it, so the reported numbers are
lower bounds on retrieval quality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import _as_matrix
from .errors import ShapeError

REPORT_KS = (1, 5, 10, 50)

TEXT_TO_VIDEO = "text_to_video"
VIDEO_TO_TEXT = "video_to_text"
DIRECTIONS = (TEXT_TO_VIDEO, VIDEO_TO_TEXT)


@dataclass(frozen=True)
class RetrievalReport:
    """Recall percentages at K in {1, 5, 10, 50} plus the median rank."""

    r_at: dict[int, float]
    median_rank: float
    direction: str

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")


def rank_matrix(sim, ground_truth) -> np.ndarray:
    """1-based rank of the correct candidate for every query row.

    ``ground_truth[i]`` is the correct candidate column for query row ``i``.
    The rank counts every candidate scoring at least as high as the correct
    one (the correct entry included), which is the pessimistic tie rule.
    """
    s = _as_matrix(sim, "sim")
    gt = np.asarray(ground_truth)
    if gt.ndim != 1 or gt.shape[0] != s.shape[0]:
        raise ShapeError(f"ground truth length {gt.shape} does not match {s.shape[0]} query rows")
    if not np.issubdtype(gt.dtype, np.integer):
        raise ValueError("ground truth indices must be integers")
    bad = np.flatnonzero((gt < 0) | (gt >= s.shape[1]))
    if bad.size:
        raise IndexError(
            f"ground truth out of range for {s.shape[1]} candidates at query rows {bad.tolist()}"
        )
    correct = s[np.arange(s.shape[0]), gt]
    return (s >= correct[:, None]).sum(axis=1)


def compute_report(ranks, direction: str = TEXT_TO_VIDEO) -> RetrievalReport:
    """Summarize a rank vector into Recall@K percentages and the median rank.

    An even number of queries takes the mean of the two middle ranks, so
    half-integer medians are possible.
    """
    r = np.asarray(ranks)
    if r.ndim != 1 or r.size == 0:
        raise ShapeError("ranks must be a non-empty 1-D vector")
    if np.any(r < 1):
        raise ValueError("ranks are 1-based, found values below 1")
    r_at = {k: 100.0 * float(np.mean(r <= k)) for k in REPORT_KS}
    return RetrievalReport(r_at=r_at, median_rank=float(np.median(r)), direction=direction)
