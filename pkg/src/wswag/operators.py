"""Linear observation operators, least-squares data terms and Lipschitz estimates.

Time-frequency grids of ``B`` bands by ``T`` frames are flattened band-major,
i.e. entry ``(b, t)`` lives at index ``b * T + t``.
"""
from __future__ import annotations

import numpy as np

from .numerics import ConfigurationError, PowerEstimate, as_complex_signal
from .solver import SmoothObjective

__all__ = [
    "LinearOperator",
    "Identity",
    "DenseMatrix",
    "BandConvolution",
    "band_convolution_apply",
    "band_convolution_adjoint",
    "least_squares_objective",
    "lipschitz_estimate",
    "LIPSCHITZ_MARGIN",
]

# relative safety margin added on top of the power-iteration estimate
LIPSCHITZ_MARGIN = 0.01


class LinearOperator:
    input_dim: int
    output_dim: int

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        return self.apply(x)


class Identity(LinearOperator):
    def __init__(self, n: int):
        if n < 1:
            raise ConfigurationError("dimension must be positive")
        self.input_dim = self.output_dim = n

    def apply(self, x):
        return as_complex_signal(x, self.input_dim).copy()

    def adjoint(self, y):
        return as_complex_signal(y, self.output_dim).copy()

    def __repr__(self):
        return f"Identity({self.input_dim})"


class DenseMatrix(LinearOperator):
    """Explicit complex ``m x n`` matrix."""

    def __init__(self, matrix):
        A = np.array(matrix, dtype=complex)
        if A.ndim != 2 or A.size == 0:
            raise ConfigurationError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
        A.setflags(write=False)
        self.matrix = A
        self.output_dim, self.input_dim = A.shape

    def apply(self, x):
        return self.matrix @ as_complex_signal(x, self.input_dim)

    def adjoint(self, y):
        return self.matrix.conj().T @ as_complex_signal(y, self.output_dim)

    def __repr__(self):
        return f"DenseMatrix({self.output_dim}x{self.input_dim})"


def _as_taps(taps, bands: int | None = None) -> np.ndarray:
    h = np.array(taps, dtype=complex)
    if h.ndim == 1:
        h = h[None, :]
    if h.ndim != 2 or h.shape[1] == 0:
        raise ConfigurationError(f"taps must be 1-D or (bands, length), got shape {h.shape}")
    if bands is not None and h.shape[0] not in (1, bands):
        raise ConfigurationError(f"taps have {h.shape[0]} rows, expected 1 or {bands}")
    if not np.all(np.isfinite(h)):
        raise ConfigurationError("taps contain non-finite values")
    return h


def band_convolution_apply(taps, grid) -> np.ndarray:
    """Causal convolution of every band (row) of ``grid`` along frames, truncated to ``T``.

    ``taps`` is either one filter shared by all bands or one row per band.
    """
    grid = np.asarray(grid, dtype=complex)
    h = _as_taps(taps, grid.shape[0])
    T = grid.shape[1]
    if h.shape[1] > T:
        raise ConfigurationError(f"filter length {h.shape[1]} exceeds {T} frames")
    out = np.zeros_like(grid)
    for k in range(h.shape[1]):
        out[:, k:] += h[:, k:k + 1] * grid[:, :T - k]
    return out


def band_convolution_adjoint(taps, grid) -> np.ndarray:
    """Adjoint of :func:`band_convolution_apply`: correlation with conjugated taps."""
    grid = np.asarray(grid, dtype=complex)
    h = _as_taps(taps, grid.shape[0])
    T = grid.shape[1]
    if h.shape[1] > T:
        raise ConfigurationError(f"filter length {h.shape[1]} exceeds {T} frames")
    out = np.zeros_like(grid)
    hc = h.conj()
    for k in range(h.shape[1]):
        out[:, :T - k] += hc[:, k:k + 1] * grid[:, k:]
    return out


class BandConvolution(LinearOperator):
    """Per-band causal filtering of a flattened ``bands x frames`` grid."""

    def __init__(self, taps, bands: int, frames: int):
        if bands < 1 or frames < 1:
            raise ConfigurationError("bands and frames must be positive")
        h = _as_taps(taps, bands)
        if h.shape[1] > frames:
            raise ConfigurationError(f"filter length {h.shape[1]} exceeds {frames} frames")
        h.setflags(write=False)
        self.taps = h
        self.bands, self.frames = bands, frames
        self.input_dim = self.output_dim = bands * frames

    def _grid(self, x):
        return as_complex_signal(x, self.input_dim).reshape(self.bands, self.frames)

    def apply(self, x):
        return band_convolution_apply(self.taps, self._grid(x)).ravel()

    def adjoint(self, y):
        return band_convolution_adjoint(self.taps, self._grid(y)).ravel()

    def __repr__(self):
        return f"BandConvolution(bands={self.bands}, frames={self.frames}, length={self.taps.shape[1]})"


def lipschitz_estimate(H: LinearOperator, tol: float = 1e-10, max_iter: int = 10_000) -> PowerEstimate:
    """Top eigenvalue of ``H^* H`` by power iteration, inflated by 1%.

    The iteration starts from the normalized all-ones vector. The margin keeps
    ``alpha = 0.9 / L`` admissible even when the estimate, which approaches the
    eigenvalue from below, has not fully converged.
    """
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    n = H.input_dim
    x = np.full(n, 1.0 / np.sqrt(n), dtype=complex)
    est = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        y = H.adjoint(H.apply(x))
        new = float(np.linalg.norm(y))
        if new == 0.0:
            est, converged = 0.0, True
            break
        if abs(new - est) <= tol * new:
            est, converged = new, True
            break
        est = new
        x = y / new
    return PowerEstimate(est * (1 + LIPSCHITZ_MARGIN), converged, it)


def least_squares_objective(H: LinearOperator, y, lipschitz: float | None = None) -> SmoothObjective:
    """``f(x) = 0.5 ||y - H x||^2`` with gradient ``H^*(H x - y)``.

    ``lipschitz`` defaults to 1 for the identity and to :func:`lipschitz_estimate`
    otherwise.
    """
    y = as_complex_signal(y, H.output_dim)
    y.setflags(write=False)
    if lipschitz is None:
        lipschitz = 1.0 if isinstance(H, Identity) else lipschitz_estimate(H).value

    def value(x):
        r = H.apply(x) - y
        return 0.5 * float(np.vdot(r, r).real)

    def gradient(x):
        return H.adjoint(H.apply(x) - y)

    return SmoothObjective(value, gradient, lipschitz, dim=H.input_dim)
