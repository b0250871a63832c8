"""Expectation-maximization routing over stacked cross-modal feature batches.

The input is a batch ``X`` of shape ``(2B, D)``: ``B`` video rows stacked on
top of ``B`` text rows, one feature dimension per column.  Each column (a
"coding bit") is soft-assigned to one of ``K`` subspaces with an
attention-style softmax (E-step); each subspace basis is then re-estimated as
the responsibility-weighted average of the coding bits it claimed (M-step)
and rescaled to unit length.  After ``T`` rounds the batch is rebuilt as the
rank-``K`` product ``bases @ Y.T``, which strips feature dimensions that
carry no structure shared across the batch.

A momentum-averaged vector ``m`` of length ``K`` carries basis information
across batches: every run starts from ``bases[i, k] = m[k]`` and, unless the
state is frozen (inference mode), finishes by folding the column means of the
final bases back into ``m``.

All functions are pure; ``update_initial_state`` returns a new state instead
of mutating.  A driver sharing one state across parallel batches must
serialize its updates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DeadSubspaceWarning, NumericalError, ShapeError

KERNELS = ("gaussian-attention", "linear", "polynomial")


@dataclass(frozen=True)
class EmclConfig:
    """Hyper-parameters of the routing loop.

    Defaults are the standard operating point: 32 subspaces, 9 iterations,
    unit kernel spread, momentum 0.9, unit residual scale.  ``epsilon``
    guards M-step denominators against subspaces with no responsibility
    mass.  ``linear_c`` and ``poly_a``/``poly_c``/``poly_d`` parameterize
    the non-default kernels in their textbook forms.
    """

    k: int = 32
    iters: int = 9
    sigma: float = 1.0
    alpha: float = 0.9
    beta: float = 1.0
    kernel: str = "gaussian-attention"
    seed: int = 0
    epsilon: float = 1e-8
    linear_c: float = 0.0
    poly_a: float = 1.0
    poly_c: float = 0.0
    poly_d: float = 2.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.iters < 1:
            raise ValueError(f"iters must be >= 1, got {self.iters}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class InitialState:
    """Cross-batch basis memory: the momentum-averaged initial value.

    ``frozen=True`` marks inference mode; ``update_initial_state`` refuses to
    run on a frozen state and callers keep it unchanged across batches.
    """

    m: np.ndarray
    alpha: float = 0.9
    frozen: bool = False

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64)
        if m.ndim != 1 or m.size < 1:
            raise ShapeError(f"state vector must be 1-D and non-empty, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NumericalError("state vector contains non-finite entries")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        object.__setattr__(self, "m", m)

    @property
    def k(self) -> int:
        return self.m.shape[0]


def cold_start_state(k: int, num_rows: int, seed: int, alpha: float = 0.9) -> InitialState:
    """Seeded random initial value for runs without a trained basis memory.

    Standard normal draw scaled by 1/sqrt(num_rows) so that the first-round
    routing logits stay O(1) regardless of batch size.
    """
    if k < 1 or num_rows < 1:
        raise ShapeError(f"k and num_rows must be >= 1, got k={k}, num_rows={num_rows}")
    rng = np.random.default_rng(seed)
    m = rng.standard_normal(k) / np.sqrt(num_rows)
    return InitialState(m=m, alpha=alpha, frozen=False)


def _as_matrix(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite entries")
    return arr


def _kernel_logits(gram: np.ndarray, config: EmclConfig) -> np.ndarray:
    """Map raw inner products to routing logits for the configured kernel."""
    if config.kernel == "gaussian-attention":
        return gram / config.sigma
    if config.kernel == "linear":
        return gram + config.linear_c
    return (config.poly_a * gram + config.poly_c) ** config.poly_d


def kernel_eval(x_col, lambda_col, config: EmclConfig) -> float:
    """Routing logit between one coding bit and one subspace basis.

    For the default attention kernel this is the inner product divided by
    ``sigma``; the exponential lives implicitly inside the E-step's row
    softmax.  The linear and polynomial kernels return their textbook values.
    """
    x = np.asarray(x_col, dtype=np.float64)
    lam = np.asarray(lambda_col, dtype=np.float64)
    if x.ndim != 1 or lam.ndim != 1:
        raise ShapeError("kernel_eval expects 1-D vectors")
    if x.size == 0 or lam.size == 0:
        raise ShapeError("kernel_eval got zero-length vectors")
    if x.shape != lam.shape:
        raise ShapeError(f"vector lengths differ: {x.shape[0]} vs {lam.shape[0]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(lam))):
        raise NumericalError("kernel_eval got non-finite input")
    return float(_kernel_logits(np.dot(x, lam), config))


def e_step(x, bases, config: EmclConfig) -> np.ndarray:
    """Soft-assign every coding bit to the K subspaces.

    Returns the (D, K) responsibility matrix: row ``j`` is the softmax over
    subspaces of the kernel logits between column ``j`` of ``x`` and each
    basis.  The softmax subtracts the per-row maximum before exponentiation,
    so rows sum to one for any finite logits.
    """
    x = _as_matrix(x, "x")
    b = _as_matrix(bases, "bases")
    if b.shape[0] != x.shape[0]:
        raise ShapeError(f"bases rows {b.shape[0]} != x rows {x.shape[0]}")
    logits = _kernel_logits(x.T @ b, config)
    if not np.all(np.isfinite(logits)):
        raise NumericalError("non-finite routing logits")
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def m_step(x, y, config: EmclConfig) -> np.ndarray:
    """Re-estimate each basis as the responsibility-weighted mean coding bit.

    Column ``k`` of the result is ``x @ y[:, k]`` divided by the total
    responsibility mass of subspace ``k`` plus ``epsilon``.  Subspaces whose
    mass falls below ``epsilon`` are reported via DeadSubspaceWarning; the
    guard keeps the result finite either way.
    """
    x = _as_matrix(x, "x")
    y = _as_matrix(y, "y")
    if y.shape[0] != x.shape[1]:
        raise ShapeError(f"responsibility rows {y.shape[0]} != x columns {x.shape[1]}")
    mass = y.sum(axis=0)
    dead = np.flatnonzero(mass < config.epsilon)
    if dead.size:
        warnings.warn(
            f"{dead.size} subspace(s) with responsibility mass below epsilon: {dead.tolist()}",
            DeadSubspaceWarning,
            stacklevel=2,
        )
    return (x @ y) / (mass + config.epsilon)


def normalize_bases(bases) -> np.ndarray:
    """Rescale every basis column to unit L2 norm.

    Exactly-zero columns are left at zero and flagged with a
    DeadSubspaceWarning rather than raising.
    """
    b = _as_matrix(bases, "bases")
    norms = np.linalg.norm(b, axis=0)
    dead = np.flatnonzero(norms == 0.0)
    if dead.size:
        warnings.warn(
            f"{dead.size} zero basis column(s) left unnormalized: {dead.tolist()}",
            DeadSubspaceWarning,
            stacklevel=2,
        )
        norms = np.where(norms == 0.0, 1.0, norms)
    return b / norms


def init_bases(state: InitialState, num_rows: int) -> np.ndarray:
    """Broadcast the state vector into a (num_rows, K) basis matrix."""
    if num_rows < 1:
        raise ShapeError(f"num_rows must be >= 1, got {num_rows}")
    return np.tile(state.m, (num_rows, 1))


def update_initial_state(state: InitialState, bases) -> InitialState:
    """Fold the basis column means into the state with momentum ``alpha``."""
    if state.frozen:
        raise ValueError("cannot update a frozen state; callers must branch on frozen")
    b = _as_matrix(bases, "bases")
    if b.shape[1] != state.k:
        raise ShapeError(f"bases have {b.shape[1]} columns, state expects {state.k}")
    m = state.alpha * state.m + (1.0 - state.alpha) * b.mean(axis=0)
    return replace(state, m=m)


def emcl_iterate(x, state: InitialState, config: EmclConfig):
    """Run the full routing loop on one stacked batch.

    Initializes the bases from ``state``, alternates E-step, M-step and
    basis normalization ``config.iters`` times, and rebuilds the batch as
    ``bases @ y.T`` (numerical rank at most K).  Returns
    ``(reconstructed, bases, responsibilities, updated_state)``; the state
    comes back untouched when frozen.  Deterministic given its inputs.
    """
    x = _as_matrix(x, "x")
    if state.k != config.k:
        raise ShapeError(f"state has K={state.k} but config has K={config.k}")
    bases = init_bases(state, x.shape[0])
    y = None
    for _ in range(config.iters):
        y = e_step(x, bases, config)
        bases = m_step(x, y, config)
        bases = normalize_bases(bases)
    reconstructed = bases @ y.T
    new_state = state if state.frozen else update_initial_state(state, bases)
    return reconstructed, bases, y, new_state


def apply_residual(original, reconstructed, beta: float) -> np.ndarray:
    """Blend the reconstruction back onto the original: beta * recon + original."""
    orig = _as_matrix(original, "original")
    recon = _as_matrix(reconstructed, "reconstructed")
    if orig.shape != recon.shape:
        raise ShapeError(f"shape mismatch: original {orig.shape} vs reconstructed {recon.shape}")
    return beta * recon + orig
