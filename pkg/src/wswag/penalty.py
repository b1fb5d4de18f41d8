"""Weighted within-group sparsity penalties and their well-posedness bounds.

The weighted penalty on complex vectors is

.. math:: P_W(x) = \\|x\\|_1 + \\tfrac12 |x|^T W |x|

with ``W`` symmetric, nonnegative and zero on the diagonal. ``W = 0`` gives the
l1 norm; a block-constant ``W`` gives the original group-partitioned penalty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import (
    BlockConstantWeights,
    ConfigurationError,
    WeightMatrix,
    as_complex_signal,
    quadratic_form,
    spectral_norm_estimate,
)

__all__ = [
    "PenaltySpec",
    "eval_weighted_swag",
    "eval_block_swag",
    "strict_convexity_lambda_limit",
    "is_positive_definite_shift",
]

# dense eigenvalue fallback is only attempted up to this size
_PD_DENSE_LIMIT = 512


def eval_weighted_swag(x, W: WeightMatrix) -> float:
    """``||x||_1 + 0.5 * |x|^T W |x|``."""
    x = as_complex_signal(x, W.n)
    mag = np.abs(x)
    return float(np.sum(mag)) + 0.5 * quadratic_form(W, mag)


def eval_block_swag(x, partition: Sequence[Sequence[int]], gamma: float) -> float:
    """Original group penalty ``||x||_1 + gamma/2 * sum_m sum_{i != j} |x_i x_j|``.

    Evaluated per group from the group sums, independently of the weight-matrix
    machinery. ``partition`` is a list of 0-based index groups that must cover
    every index of ``x`` exactly once.
    """
    x = as_complex_signal(x)
    if gamma < 0:
        raise ConfigurationError(f"gamma must be >= 0, got {gamma}")
    seen = np.zeros(x.size, dtype=bool)
    mag = np.abs(x)
    cross = 0.0
    for group in partition:
        idx = np.asarray(group, dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= x.size):
            raise ConfigurationError("partition index out of range")
        if np.any(seen[idx]) or np.unique(idx).size != idx.size:
            raise ConfigurationError("partition groups overlap")
        seen[idx] = True
        m = mag[idx]
        s = m.sum()
        cross += s * s - np.dot(m, m)
    if not np.all(seen):
        raise ConfigurationError("partition does not cover every index")
    return float(mag.sum()) + 0.5 * gamma * cross


def strict_convexity_lambda_limit(W: WeightMatrix) -> float:
    """Supremum of the regularization weights with a strictly convex threshold problem.

    Returns ``1 / max_row_sum(W)`` (``math.inf`` when ``W = 0``). The bound is
    strict: only weights *below* it are covered, and it is sufficient, not sharp.
    """
    r = W.max_row_sum()
    return math.inf if r == 0 else 1.0 / r


def is_positive_definite_shift(W: WeightMatrix, beta: float) -> bool:
    """Decide whether ``I + beta * W`` is positive definite.

    The row-sum test ``1 - beta * max_row_sum(W) > 0`` settles most cases.
    Otherwise the smallest eigenvalue is computed exactly: in closed form for
    block-constant weights, by a dense symmetric eigensolver for ``n <= 512``.
    Larger matrices fall back to ``1 - beta * ||W|| > 0`` with the power-iteration
    norm (inflated by 1e-8 since it approaches from below); failing that they are
    reported as not certified (``False``).
    """
    if beta < 0:
        raise ConfigurationError(f"beta must be >= 0, got {beta}")
    if beta == 0 or 1.0 - beta * W.max_row_sum() > 0:
        return True
    if isinstance(W, BlockConstantWeights):
        return 1.0 + beta * W.min_eigenvalue() > 0
    if W.n <= _PD_DENSE_LIMIT:
        lam_min = np.linalg.eigvalsh(W.to_dense())[0]
        return bool(1.0 + beta * lam_min > 0)
    est = spectral_norm_estimate(W)
    return est.converged and 1.0 - beta * est.value * (1 + 1e-8) > 0


@dataclass(frozen=True)
class PenaltySpec:
    """Regularizer ``lam * P_W``; ``weights=None`` means the plain l1 norm."""

    lam: float
    weights: WeightMatrix | None = None

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ConfigurationError(f"lambda must be finite and >= 0, got {self.lam}")

    @property
    def kind(self) -> str:
        return "l1" if self.weights is None else "weighted_swag"

    def __call__(self, x) -> float:
        if self.weights is None:
            return self.lam * float(np.sum(np.abs(as_complex_signal(x))))
        return self.lam * eval_weighted_swag(x, self.weights)
