"""Randomized invariant battery behind ``wswag check``.

Each check draws seeded random instances, tests one structural property and
returns a :class:`CheckResult`. The pytest suite covers the same ground with
larger counts; this module is the quick self-test shipped with the CLI.
"""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .numerics import BlockConstantWeights, DenseWeights, ToeplitzWeights, max_row_sum, spectral_norm_estimate
from .operators import BandConvolution, DenseMatrix, Identity, least_squares_objective
from .penalty import strict_convexity_lambda_limit
from .prox import ProxSpec, brute_force_prox, magnitude_objective, objective_D, prox_approx, step_S
from .solver import SolverConfig, majorizer_value, mm_solve, objective_C


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def random_weights(rng, n: int, density: float = 0.5, scale: float = 1.0) -> DenseWeights:
    A = rng.uniform(0, scale, size=(n, n)) * (rng.uniform(size=(n, n)) < density)
    A = np.triu(A, 1)
    return DenseWeights(A + A.T)


def random_complex(rng, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def check_representations(rng, trials: int = 20) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 40))
        col = rng.uniform(0, 1, n) * (rng.uniform(size=n) < 0.4)
        col[0] = 0
        reps = [ToeplitzWeights(col), BlockConstantWeights(rng.integers(0, 4, n), rng.uniform(0, 3))]
        for W in reps:
            D = W.to_dense()
            for _ in range(10):
                v = rng.standard_normal(n)
                ref = D @ v
                worst = max(worst, np.max(np.abs(W.matvec(v) - ref)) / max(1.0, np.max(np.abs(ref))))
    return CheckResult("structured matvec == dense matvec", worst <= 1e-12, f"max rel err {worst:.2e}")


def check_gershgorin(rng, trials: int = 50) -> CheckResult:
    bad = 0
    for _ in range(trials):
        W = random_weights(rng, int(rng.integers(2, 30)))
        if spectral_norm_estimate(W).value > max_row_sum(W) * (1 + 1e-9):
            bad += 1
    return CheckResult("power estimate <= max row sum", bad == 0, f"{bad} violations / {trials}")


def check_convexity(rng, trials: int = 30, pairs: int = 30) -> CheckResult:
    bad = 0
    for _ in range(trials):
        n = int(rng.integers(2, 16))
        W = random_weights(rng, n, scale=2.0)
        limit = strict_convexity_lambda_limit(W)
        lam = 0.95 * limit if np.isfinite(limit) else 1.0
        spec = ProxSpec(random_complex(rng, n), lam, W)
        for _ in range(pairs):
            a, b = random_complex(rng, n), random_complex(rng, n)
            mid = objective_D(0.5 * (a + b), spec)
            if mid > 0.5 * objective_D(a, spec) + 0.5 * objective_D(b, spec) + 1e-10:
                bad += 1
    return CheckResult("midpoint convexity below the row-sum limit", bad == 0, f"{bad} violations")


def check_inner_gap(rng, trials: int = 100) -> CheckResult:
    worst = np.inf
    for _ in range(trials):
        n = int(rng.integers(1, 20))
        W = random_weights(rng, n)
        spec = ProxSpec(random_complex(rng, n), rng.uniform(0, 2), W)
        x = np.abs(random_complex(rng, n))
        sx = step_S(x, spec)
        gap = magnitude_objective(x, spec) - magnitude_objective(sx, spec)
        bound = (1 / spec.eta - spec.sigma_bound / 2) * float(np.sum((x - sx) ** 2))
        worst = min(worst, gap - bound)
    return CheckResult("projected-gradient descent gap", worst >= -1e-10, f"min slack {worst:.2e}")


def check_oracle(rng, trials: int = 3) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        W = DenseWeights([[0, w := rng.uniform(0, 1)], [w, 0]])
        beta = rng.uniform(0.05, 0.5 / max(w, 1e-3))
        spec = ProxSpec(random_complex(rng, 2), min(beta, 1.0), W, inner_iters=10_000)
        worst = max(worst, np.max(np.abs(prox_approx(spec) - brute_force_prox(spec, 1e-3))))
    return CheckResult("projected gradient vs grid oracle (n=2)", worst <= 2e-3, f"max gap {worst:.2e}")


def check_majorizer(rng, trials: int = 50) -> CheckResult:
    worst_touch, worst_dom = 0.0, -np.inf
    for _ in range(trials):
        n = int(rng.integers(2, 10))
        H = DenseMatrix(random_complex(rng, n * n).reshape(n, n))
        f = least_squares_objective(H, random_complex(rng, n))
        W, lam, alpha = random_weights(rng, n), rng.uniform(0, 1), 1 / f.lipschitz
        xk, x = random_complex(rng, n), random_complex(rng, n)
        c = objective_C(xk, f, lam, W)
        worst_touch = max(worst_touch, abs(majorizer_value(xk, xk, f, lam, W, alpha) - c) / max(1, abs(c)))
        worst_dom = max(worst_dom, objective_C(x, f, lam, W) - majorizer_value(x, xk, f, lam, W, alpha))
    ok = worst_touch <= 1e-10 and worst_dom <= 1e-10
    return CheckResult("majorizer touches and dominates", ok, f"touch {worst_touch:.1e}, dominance {worst_dom:.1e}")


def check_descent(rng, trials: int = 40) -> CheckResult:
    bad = 0
    for _ in range(trials):
        n = int(rng.integers(2, 32))
        H = DenseMatrix(random_complex(rng, n * n).reshape(n, n))
        f = least_squares_objective(H, random_complex(rng, n))
        cfg = SolverConfig(lam=rng.uniform(0.01, 2), weights=random_weights(rng, n, scale=3), max_outer=50,
                           inner_iters=int(rng.integers(1, 20)))
        t = mm_solve(f, cfg).objective_trace
        bad += int(np.any(t[1:] > t[:-1] + 1e-10 * (1 + np.abs(t[:-1]))))
    return CheckResult("monotone objective traces", bad == 0, f"{bad} violating solves / {trials}")


def check_adjoint(rng, trials: int = 20) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        B, T = int(rng.integers(1, 6)), int(rng.integers(2, 20))
        L = int(rng.integers(1, T + 1))
        ops = [Identity(B * T), DenseMatrix(random_complex(rng, B * T * 3).reshape(3, B * T)),
               BandConvolution(random_complex(rng, B * L).reshape(B, L), B, T)]
        for H in ops:
            x, y = random_complex(rng, H.input_dim), random_complex(rng, H.output_dim)
            lhs = np.vdot(y, H.apply(x)).real
            rhs = np.vdot(H.adjoint(y), x).real
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return CheckResult("adjoint identity", worst <= 1e-10, f"max rel err {worst:.2e}")


CHECKS: list[Callable] = [
    check_representations,
    check_gershgorin,
    check_convexity,
    check_inner_gap,
    check_oracle,
    check_majorizer,
    check_descent,
    check_adjoint,
]


def run_checks(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [check(rng) for check in CHECKS]
