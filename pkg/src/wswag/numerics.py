"""Complex-vector helpers, weight-matrix representations and power iteration.

Signals are plain 1-D numpy arrays (complex for coefficient vectors, float for
magnitudes). Weight matrices are symmetric, nonnegative and zero-diagonal and
come in three storage forms: :class:`DenseWeights`, :class:`ToeplitzWeights`
and :class:`BlockConstantWeights`. All of them expose the same small surface
(``n``, ``matvec``, ``max_row_sum``, ``to_dense``) so the penalty and prox code
never needs to know which one it holds.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "ConfigurationError",
    "NumericalError",
    "as_complex_signal",
    "as_real_signal",
    "magnitude",
    "phase_of",
    "WeightMatrix",
    "DenseWeights",
    "ToeplitzWeights",
    "BlockConstantWeights",
    "zero_weights",
    "matvec",
    "quadratic_form",
    "max_row_sum",
    "PowerEstimate",
    "spectral_norm_estimate",
]


class ConfigurationError(ValueError):
    """Invalid parameters detected before any iteration runs."""


class NumericalError(ArithmeticError):
    """Non-finite values produced during an iteration."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_complex_signal(x, n: int | None = None) -> np.ndarray:
    """Validate ``x`` as a finite 1-D complex vector (optionally of length ``n``)."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"expected a non-empty 1-D signal, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains NaN or Inf entries")
    if n is not None and x.size != n:
        raise ValueError(f"dimension mismatch: expected length {n}, got {x.size}")
    return x


def as_real_signal(v, n: int | None = None, nonnegative: bool = False) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D signal, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("signal contains NaN or Inf entries")
    if n is not None and v.size != n:
        raise ValueError(f"dimension mismatch: expected length {n}, got {v.size}")
    if nonnegative and np.any(v < 0):
        raise ValueError("expected a nonnegative signal")
    return v


def magnitude(x) -> np.ndarray:
    """Entry-wise modulus ``|x|``."""
    return np.abs(np.asarray(x, dtype=complex))


def phase_of(z) -> np.ndarray:
    """Unit-modulus vector pointing along ``z``.

    Zero entries map to ``1`` so that ``|x| * phase_of(z)`` is always defined;
    the choice does not affect any objective since the magnitude there is 0.
    """
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    out = np.ones_like(z)
    nz = mag > 0
    # component-wise real division stays finite for subnormal entries
    out[nz] = z.real[nz] / mag[nz] + 1j * (z.imag[nz] / mag[nz])
    return out


class WeightMatrix:
    """Common interface of the weight-matrix representations."""

    n: int

    def matvec(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def max_row_sum(self) -> float:
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        raise NotImplementedError

    def _check_dim(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValueError(
                f"dimension mismatch: weight matrix is {self.n}x{self.n}, vector has shape {v.shape}"
            )
        return v


class DenseWeights(WeightMatrix):
    """Explicit ``n x n`` weight matrix.

    Symmetry (1e-12 relative), nonnegativity and a zero diagonal are checked at
    construction; nothing is repaired silently.
    """

    def __init__(self, matrix):
        w = np.array(matrix, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
            raise ConfigurationError(f"weight matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ConfigurationError("weight matrix has non-finite entries")
        if np.any(w < 0):
            raise ConfigurationError("weight matrix has negative entries")
        if np.any(np.diag(w) != 0):
            raise ConfigurationError("weight matrix must have a zero diagonal")
        scale = np.max(np.abs(w), initial=0.0)
        if np.max(np.abs(w - w.T), initial=0.0) > 1e-12 * scale:
            raise ConfigurationError("weight matrix is not symmetric")
        self.n = w.shape[0]
        self.matrix = _frozen(w)

    def matvec(self, v):
        return self.matrix @ self._check_dim(v)

    def max_row_sum(self):
        return float(np.max(self.matrix.sum(axis=1)))

    def to_dense(self):
        return self.matrix.copy()

    def __repr__(self):
        return f"DenseWeights(n={self.n})"


class ToeplitzWeights(WeightMatrix):
    """Symmetric Toeplitz matrix stored by its first column.

    ``W[i, j] = column[|i - j|]``. Products are computed by direct summation over
    the nonzero lags only, so a narrow profile costs ``O(n * support)``.
    """

    def __init__(self, column):
        c = np.array(column, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ConfigurationError("Toeplitz first column must be a non-empty 1-D array")
        if not np.all(np.isfinite(c)):
            raise ConfigurationError("Toeplitz column has non-finite entries")
        if np.any(c < 0):
            raise ConfigurationError("Toeplitz column has negative entries")
        if c[0] != 0:
            raise ConfigurationError("Toeplitz column must start with 0 (zero diagonal)")
        self.n = c.size
        self.column = _frozen(c)
        self._lags = np.flatnonzero(c)

    def matvec(self, v):
        v = self._check_dim(v)
        out = np.zeros(self.n)
        c = self.column
        for k in self._lags:
            out[k:] += c[k] * v[:-k]
            out[:-k] += c[k] * v[k:]
        return out

    def row_sums(self) -> np.ndarray:
        # row i collects lags 1..i (left) and 1..n-1-i (right)
        cum = np.concatenate(([0.0], np.cumsum(self.column[1:])))
        i = np.arange(self.n)
        return cum[i] + cum[self.n - 1 - i]

    def max_row_sum(self):
        return float(np.max(self.row_sums()))

    def to_dense(self):
        idx = np.arange(self.n)
        return self.column[np.abs(idx[:, None] - idx[None, :])]

    def __repr__(self):
        return f"ToeplitzWeights(n={self.n}, support={self._lags.size})"


class BlockConstantWeights(WeightMatrix):
    """Disjoint groups with a constant coupling ``gamma`` inside each group.

    ``W[i, j] = gamma`` when ``i != j`` share a group, else 0. This is the
    weight matrix that turns the weighted penalty into the original
    group-partitioned one.

    Parameters
    ----------
    labels : array_like of int, shape (n,)
        Group identifier of every index.
    gamma : float
        Within-group coupling, ``>= 0``.
    """

    def __init__(self, labels, gamma: float):
        labels = np.asarray(labels)
        if labels.ndim != 1 or labels.size == 0:
            raise ConfigurationError("group labels must be a non-empty 1-D array")
        if not np.isfinite(gamma) or gamma < 0:
            raise ConfigurationError(f"gamma must be finite and >= 0, got {gamma}")
        _, inverse = np.unique(labels, return_inverse=True)
        self.n = labels.size
        self.labels = _frozen(labels.copy())
        self.gamma = float(gamma)
        self._group = _frozen(inverse.ravel())
        self._sizes = _frozen(np.bincount(self._group))

    @classmethod
    def from_partition(cls, partition: Sequence[Sequence[int]], gamma: float, n: int | None = None):
        """Build from a list of index groups (0-based) covering ``0..n-1`` exactly once."""
        if n is None:
            n = sum(len(g) for g in partition)
        labels = np.full(n, -1)
        for gid, group in enumerate(partition):
            for i in group:
                if not 0 <= i < n:
                    raise ConfigurationError(f"index {i} outside 0..{n - 1}")
                if labels[i] != -1:
                    raise ConfigurationError(f"index {i} appears in more than one group")
                labels[i] = gid
        if np.any(labels < 0):
            missing = np.flatnonzero(labels < 0)
            raise ConfigurationError(f"partition does not cover indices {missing.tolist()}")
        return cls(labels, gamma)

    @classmethod
    def contiguous(cls, n: int, group_size: int, gamma: float):
        """Consecutive groups of ``group_size`` (the last one may be shorter)."""
        return cls(np.arange(n) // group_size, gamma)

    @property
    def groups(self) -> list[np.ndarray]:
        return [np.flatnonzero(self._group == g) for g in range(self._sizes.size)]

    def matvec(self, v):
        v = self._check_dim(v)
        sums = np.bincount(self._group, weights=v, minlength=self._sizes.size)
        return self.gamma * (sums[self._group] - v)

    def max_row_sum(self):
        return self.gamma * float(np.max(self._sizes) - 1)

    def min_eigenvalue(self) -> float:
        # gamma * (J - I) per group has eigenvalues gamma*(s-1) and -gamma
        return -self.gamma if np.any(self._sizes > 1) else 0.0

    def to_dense(self):
        same = self._group[:, None] == self._group[None, :]
        w = np.where(same, self.gamma, 0.0)
        np.fill_diagonal(w, 0.0)
        return w

    def __repr__(self):
        return f"BlockConstantWeights(n={self.n}, groups={self._sizes.size}, gamma={self.gamma})"


def zero_weights(n: int) -> ToeplitzWeights:
    """The all-zero weight matrix, which reduces every penalty to the l1 norm."""
    return ToeplitzWeights(np.zeros(n))


def matvec(W: WeightMatrix, v) -> np.ndarray:
    return W.matvec(v)


def quadratic_form(W: WeightMatrix, v) -> float:
    """``v^T W v``; nonnegative whenever ``v >= 0``."""
    v = np.asarray(v, dtype=float)
    return float(v @ W.matvec(v))


def max_row_sum(W: WeightMatrix) -> float:
    """``max_i sum_{j != i} w_ij``, an upper bound on the spectral norm of ``W``."""
    return W.max_row_sum()


class PowerEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


def spectral_norm_estimate(W: WeightMatrix, tol: float = 1e-10, max_iter: int = 10_000) -> PowerEstimate:
    """Largest singular value of ``W`` by power iteration.

    Starts from the normalized all-ones vector and tracks ``||W x||`` for unit
    ``x``. For a symmetric matrix that ratio is nondecreasing and bounded by the
    spectral norm, so the estimate never exceeds ``max_row_sum(W)`` and does not
    oscillate when ``W`` has eigenvalues ``+rho`` and ``-rho``.

    Non-convergence within ``max_iter`` is reported through ``converged=False``
    together with the best estimate.
    """
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    x = np.full(W.n, 1.0 / np.sqrt(W.n))
    est = 0.0
    for it in range(1, max_iter + 1):
        y = W.matvec(x)
        new = float(np.linalg.norm(y))
        if new == 0.0:
            return PowerEstimate(0.0, True, it)
        if abs(new - est) <= tol * new:
            return PowerEstimate(new, True, it)
        est = new
        x = y / new
    return PowerEstimate(est, False, max_iter)
