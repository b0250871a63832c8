"""Diagonal-covariance Gaussian mixture fitted by expectation-maximization.

This is the in-repo reference point for EM mechanics: posterior
responsibilities normalize row-wise, mixture weights stay on the simplex,
and the data log-likelihood never decreases across iterations.  Densities
are evaluated in the log domain with log-sum-exp normalization so that
high-dimensional inputs do not underflow.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ShapeError

VARIANCE_FLOOR = 1e-6

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GmmParams:
    """Mixture parameters: per-component means, diagonal variances, weights."""

    means: np.ndarray      # (K, D)
    variances: np.ndarray  # (K, D), diagonal covariances
    weights: np.ndarray    # (K,)

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        variances = np.atleast_2d(np.asarray(self.variances, dtype=np.float64))
        weights = np.asarray(self.weights, dtype=np.float64)
        if means.shape != variances.shape:
            raise ShapeError(f"means shape {means.shape} != variances shape {variances.shape}")
        if weights.ndim != 1 or weights.shape[0] != means.shape[0]:
            raise ShapeError(f"weights shape {weights.shape} inconsistent with {means.shape[0]} components")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(variances)) and np.all(np.isfinite(weights))):
            raise NumericalError("mixture parameters contain non-finite entries")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1 within 1e-9")
        if np.any(variances <= 0):
            raise NumericalError("variances must be strictly positive")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "weights", weights)

    @property
    def k(self) -> int:
        return self.means.shape[0]


def _as_data(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ShapeError(f"data must be a non-empty matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError("data contains non-finite entries")
    return arr


def _log_joint(data: np.ndarray, params: GmmParams) -> np.ndarray:
    """log(weight_k) + log N(x_n | mean_k, diag variance_k), shape (N, K)."""
    if data.shape[1] != params.means.shape[1]:
        raise ShapeError(f"data dimension {data.shape[1]} != component dimension {params.means.shape[1]}")
    diff = data[:, None, :] - params.means[None, :, :]           # (N, K, D)
    quad = np.sum(diff * diff / params.variances[None, :, :], axis=2)
    log_det = np.sum(np.log(params.variances), axis=1)           # (K,)
    log_norm = -0.5 * (params.means.shape[1] * _LOG_2PI + log_det)
    with np.errstate(divide="ignore"):                           # log(0) = -inf for empty components
        log_w = np.log(params.weights)
    return log_w[None, :] + log_norm[None, :] - 0.5 * quad


def gmm_e_step(data, params: GmmParams) -> np.ndarray:
    """Posterior responsibilities, row-stochastic, computed in the log domain."""
    x = _as_data(data)
    joint = _log_joint(x, params)
    top = joint.max(axis=1, keepdims=True)
    shifted = np.exp(joint - top)
    return shifted / shifted.sum(axis=1, keepdims=True)


def gmm_m_step(data, resp, rng: np.random.Generator | None = None) -> GmmParams:
    """Update weights, means and diagonal variances from soft assignments.

    Components with zero total responsibility are reinitialized to a random
    data point (seeded via ``rng``; a fixed default generator is used when
    none is supplied) with a warning; variances are floored at 1e-6.
    """
    x = _as_data(data)
    r = np.asarray(resp, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] != x.shape[0]:
        raise ShapeError(f"responsibilities shape {r.shape} inconsistent with {x.shape[0]} samples")
    n, k = r.shape
    mass = r.sum(axis=0)                                         # (K,)
    dead = np.flatnonzero(mass < np.finfo(np.float64).tiny)
    if dead.size:
        warnings.warn(
            f"{dead.size} mixture component(s) with zero responsibility reinitialized: {dead.tolist()}",
            stacklevel=2,
        )
        if rng is None:
            rng = np.random.default_rng(0)
    safe_mass = np.where(mass > 0, mass, 1.0)
    means = (r.T @ x) / safe_mass[:, None]
    diff = x[:, None, :] - means[None, :, :]
    variances = np.einsum("nk,nkd->kd", r, diff * diff) / safe_mass[:, None]
    weights = mass / n
    data_var = np.maximum(x.var(axis=0), VARIANCE_FLOOR)
    for idx in dead:
        means[idx] = x[rng.integers(n)]
        variances[idx] = data_var
        weights[idx] = 1.0 / n
    weights = weights / weights.sum()
    variances = np.maximum(variances, VARIANCE_FLOOR)
    return GmmParams(means=means, variances=variances, weights=weights)


def log_likelihood(data, params: GmmParams) -> float:
    """Total data log-likelihood under the mixture."""
    x = _as_data(data)
    joint = _log_joint(x, params)
    top = joint.max(axis=1)
    return float(np.sum(top + np.log(np.sum(np.exp(joint - top[:, None]), axis=1))))


def init_params(data, k: int, seed: int) -> GmmParams:
    """Seeded initialization: spread data points as means, pooled variance, uniform weights.

    Means are chosen greedily with probability proportional to the squared
    distance from the points already picked (k-means++ style), which keeps
    the fit off symmetric local optima without breaking determinism.
    """
    x = _as_data(data)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    n = x.shape[0]
    rows = [int(rng.integers(n))]
    for _ in range(1, k):
        dist_sq = np.min(
            np.sum((x[:, None, :] - x[rows][None, :, :]) ** 2, axis=2), axis=1
        )
        total = dist_sq.sum()
        if total > 0:
            rows.append(int(rng.choice(n, p=dist_sq / total)))
        else:
            rows.append(int(rng.integers(n)))
    means = x[rows].copy()
    variances = np.tile(np.maximum(x.var(axis=0), VARIANCE_FLOOR), (k, 1))
    weights = np.full(k, 1.0 / k)
    return GmmParams(means=means, variances=variances, weights=weights)


def gmm_fit(data, k: int, iters: int, seed: int) -> tuple[GmmParams, np.ndarray]:
    """Alternate E and M steps, recording the log-likelihood after each round.

    Returns the fitted parameters and the length-``iters`` likelihood trace,
    which is non-decreasing up to floating-point slack.
    """
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    x = _as_data(data)
    rng = np.random.default_rng(seed)
    params = init_params(x, k, seed)
    trace = np.empty(iters, dtype=np.float64)
    for t in range(iters):
        resp = gmm_e_step(x, params)
        params = gmm_m_step(x, resp, rng)
        trace[t] = log_likelihood(x, params)
    return params, trace
