"""Threshold subproblem of the weighted penalty and its projected-gradient solver.

For an observation ``z``, weight ``beta`` and weights ``W`` the subproblem is

.. math:: D(x; z) = \\tfrac12 \\|z - x\\|^2 + \\beta \\left(\\|x\\|_1 + \\tfrac12 |x|^T W |x|\\right).

Replacing ``x`` by ``|x| e^{j\\angle z}`` never increases ``D``, so the problem
reduces to a quadratic over the nonnegative orthant in the magnitudes,

.. math:: \\min_{m \\geq 0} \\tfrac12 m^T (I + \\beta W) m - \\langle |z| - \\beta 1, m \\rangle,

which is handled with projected gradient steps (the operator ``S`` below). The
phase of ``z`` is restored at the end.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    ConfigurationError,
    WeightMatrix,
    as_complex_signal,
    as_real_signal,
    phase_of,
    quadratic_form,
    spectral_norm_estimate,
    zero_weights,
)

__all__ = [
    "ProxSpec",
    "default_eta",
    "objective_D",
    "magnitude_objective",
    "grad_quadratic",
    "step_S",
    "prox_approx",
    "brute_force_prox",
    "fixed_point_residual",
]


def default_eta(beta: float, weights: WeightMatrix) -> float:
    """``1.9 / (1 + beta * max_row_sum(W))``, a safe step since the row sum bounds ``||W||``."""
    return 1.9 / (1.0 + beta * weights.max_row_sum())


def check_step_size(eta: float, beta: float, weights: WeightMatrix) -> None:
    """Raise unless ``eta * ||I + beta W|| < 2``."""
    if not np.isfinite(eta) or eta <= 0:
        raise ConfigurationError(f"eta must be positive, got {eta}")
    if eta * (1.0 + beta * weights.max_row_sum()) < 2:
        return
    # the row-sum bound is loose; ||I + beta W|| = 1 + beta * ||W|| for nonnegative W
    est = spectral_norm_estimate(weights)
    sigma = 1.0 + beta * est.value
    if not est.converged or eta * sigma >= 2:
        raise ConfigurationError(
            f"step size eta={eta} violates eta * ||I + beta W|| < 2 (||I + beta W|| ~ {sigma:.6g})"
        )


@dataclass(frozen=True)
class ProxSpec:
    """Data of one threshold subproblem.

    Parameters
    ----------
    z : array_like of complex
        Point being thresholded.
    beta : float
        Penalty weight, ``>= 0``.
    weights : WeightMatrix, optional
        Coupling matrix; ``None`` means ``W = 0``.
    eta : float, optional
        Projected-gradient step; defaults to :func:`default_eta`.
    inner_iters : int
        Number of applications of ``S`` in :func:`prox_approx`.
    """

    z: np.ndarray
    beta: float
    weights: WeightMatrix | None = None
    eta: float | None = None
    inner_iters: int = 10
    sigma_bound: float = field(init=False)
    outside_convex_regime: bool = field(init=False)

    def __post_init__(self):
        z = as_complex_signal(self.z)
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ConfigurationError(f"beta must be finite and >= 0, got {self.beta}")
        if self.weights is None:
            object.__setattr__(self, "weights", zero_weights(z.size))
        elif self.weights.n != z.size:
            raise ValueError(f"dimension mismatch: z has length {z.size}, W is {self.weights.n}x{self.weights.n}")
        if self.inner_iters < 1:
            raise ConfigurationError("inner_iters must be >= 1")
        row = self.beta * self.weights.max_row_sum()
        object.__setattr__(self, "sigma_bound", 1.0 + row)
        object.__setattr__(self, "outside_convex_regime", row >= 1.0)
        if self.eta is None:
            object.__setattr__(self, "eta", default_eta(self.beta, self.weights))
        else:
            check_step_size(self.eta, self.beta, self.weights)

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def abs_z(self) -> np.ndarray:
        return np.abs(self.z)


def objective_D(x, spec: ProxSpec) -> float:
    """``0.5 ||z - x||^2 + beta * (||x||_1 + 0.5 |x|^T W |x|)``."""
    x = as_complex_signal(x, spec.n)
    mag = np.abs(x)
    pen = float(np.sum(mag)) + 0.5 * quadratic_form(spec.weights, mag)
    r = spec.z - x
    return 0.5 * float(np.vdot(r, r).real) + spec.beta * pen


def magnitude_objective(m, spec: ProxSpec) -> float:
    """``D(m; |z|)`` for a nonnegative magnitude vector ``m``."""
    m = as_real_signal(m, spec.n)
    r = spec.abs_z - m
    return 0.5 * float(r @ r) + spec.beta * (float(np.sum(np.abs(m))) + 0.5 * quadratic_form(spec.weights, np.abs(m)))


def grad_quadratic(x, spec: ProxSpec) -> np.ndarray:
    """Gradient ``(I + beta W) x + beta 1 - |z|`` of the orthant quadratic."""
    x = as_real_signal(x, spec.n, nonnegative=True)
    return x + spec.beta * spec.weights.matvec(x) + spec.beta - spec.abs_z


def _step(m, abs_z, beta, weights, eta):
    g = m + beta * weights.matvec(m) + beta - abs_z
    return np.maximum(m - eta * g, 0.0)


def step_S(x, spec: ProxSpec) -> np.ndarray:
    """One projected gradient step ``P_+(x - eta * grad_quadratic(x))``."""
    x = as_real_signal(x, spec.n, nonnegative=True)
    return _step(x, spec.abs_z, spec.beta, spec.weights, spec.eta)


def run_inner(m, abs_z, beta, weights, eta, iters: int) -> np.ndarray:
    """``S`` applied ``iters`` times to the magnitudes ``m`` (no validation)."""
    for _ in range(iters):
        m = _step(m, abs_z, beta, weights, eta)
    return m


def prox_approx(spec: ProxSpec, start=None) -> np.ndarray:
    """Approximate threshold: ``S^K(start) * e^{j angle z}``.

    ``start`` is a nonnegative magnitude vector and defaults to ``|z|``. Every
    application of ``S`` decreases the subproblem objective.
    """
    m = spec.abs_z.copy() if start is None else as_real_signal(start, spec.n, nonnegative=True).copy()
    m = run_inner(m, spec.abs_z, spec.beta, spec.weights, spec.eta, spec.inner_iters)
    return m * phase_of(spec.z)


def brute_force_prox(spec: ProxSpec, grid_step: float) -> np.ndarray:
    """Exhaustive grid search for the threshold, for ``n <= 3``.

    Magnitudes range over ``[0, max|z_i|]^n`` at spacing ``grid_step`` (the
    minimizer never exceeds ``|z|`` entry-wise); the phase of ``z`` is restored
    on the grid minimizer.
    """
    n = spec.n
    if n > 3:
        raise ValueError(f"brute_force_prox supports n <= 3, got n={n}")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    abs_z = spec.abs_z
    top = float(abs_z.max())
    if top == 0:
        return np.zeros(n, dtype=complex)
    axis = np.arange(int(np.ceil(top / grid_step)) + 1) * grid_step
    Wd = spec.weights.to_dense()
    beta = spec.beta

    best_val, best = np.inf, None
    # fix the first coordinate and vectorize over the rest
    rest = np.stack(np.meshgrid(*([axis] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1) if n > 1 else np.zeros((1, 0))
    for a in axis:
        pts = np.concatenate([np.full((rest.shape[0], 1), a), rest], axis=1)
        r = abs_z - pts
        quad = np.einsum("ki,ij,kj->k", pts, Wd, pts)
        vals = 0.5 * np.sum(r * r, axis=1) + beta * (pts.sum(axis=1) + 0.5 * quad)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best = vals[k], pts[k].copy()
    return best * phase_of(spec.z)


def fixed_point_residual(x, spec: ProxSpec) -> float:
    """``|| |x| - S(|x|) ||_2``; zero exactly at minimizers of the orthant problem."""
    m = np.abs(as_complex_signal(x, spec.n))
    return float(np.linalg.norm(m - step_S(m, spec)))

