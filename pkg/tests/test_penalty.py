import math

import numpy as np
import pytest

from conftest import random_complex, random_dense_weights
from wswag.numerics import BlockConstantWeights, ConfigurationError, DenseWeights, zero_weights
from wswag.penalty import (
    PenaltySpec,
    eval_block_swag,
    eval_weighted_swag,
    is_positive_definite_shift,
    strict_convexity_lambda_limit,
)
from wswag.prox import ProxSpec, objective_D

W2 = DenseWeights([[0, 0.5], [0.5, 0]])


def test_weighted_swag_examples():
    assert eval_weighted_swag([0, 0], W2) == 0
    assert eval_weighted_swag([3 + 4j, -2], zero_weights(2)) == pytest.approx(7)
    assert eval_weighted_swag([1, -2j], W2) == pytest.approx(4)


def test_weighted_swag_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_weighted_swag([1, 2, 3], W2)


def test_block_swag_examples():
    assert eval_block_swag([1, 1], [[0, 1]], 1.0) == pytest.approx(3)
    a, b = 2 - 1j, 0.5j
    assert eval_block_swag([a, b], [[0], [1]], 17.0) == pytest.approx(abs(a) + abs(b))
    assert eval_block_swag([1, 1, 1], [[0, 1, 2]], 2.0) == pytest.approx(9)


@pytest.mark.parametrize("partition", [[[0, 1], [1, 2]], [[0, 1]], [[0, 1, 2, 3]]])
def test_block_swag_rejects_bad_partition(partition):
    with pytest.raises(ConfigurationError):
        eval_block_swag([1, 2, 3], partition, 1.0)


def _pairwise_reference(x, partition, gamma):
    # literal double sum over distinct pairs inside each group
    mag = np.abs(x)
    total = mag.sum()
    for g in partition:
        for i in g:
            for j in g:
                if i != j:
                    total += 0.5 * gamma * mag[i] * mag[j]
    return total


def test_block_swag_matches_weighted_reduction(rng):
    for _ in range(200):
        n = int(rng.integers(1, 25))
        labels = rng.integers(0, 5, n)
        partition = [np.flatnonzero(labels == g).tolist() for g in np.unique(labels)]
        gamma = rng.uniform(0, 5)
        x = random_complex(rng, n)
        block = eval_block_swag(x, partition, gamma)
        weighted = eval_weighted_swag(x, BlockConstantWeights(labels, gamma))
        assert block == pytest.approx(weighted, rel=1e-12)
        assert block == pytest.approx(_pairwise_reference(x, partition, gamma), rel=1e-12)


def test_phase_invariance(rng):
    for _ in range(100):
        n = int(rng.integers(1, 20))
        W = random_dense_weights(rng, n)
        x = random_complex(rng, n)
        u = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        assert eval_weighted_swag(x * u, W) == pytest.approx(eval_weighted_swag(x, W), rel=1e-12)


def test_lambda_limit_examples():
    assert strict_convexity_lambda_limit(zero_weights(5)) == math.inf
    assert strict_convexity_lambda_limit(BlockConstantWeights.contiguous(60, 15, 40.0)) == pytest.approx(1 / 560)
    assert strict_convexity_lambda_limit(W2) == pytest.approx(2)


def test_pd_shift_examples():
    assert is_positive_definite_shift(W2, 0.0)
    assert is_positive_definite_shift(W2, 1.0)
    assert not is_positive_definite_shift(W2, 3.0)


def test_pd_shift_matches_eigenvalues(rng):
    for _ in range(50):
        W = random_dense_weights(rng, int(rng.integers(2, 12)), scale=2.0)
        beta = rng.uniform(0, 3)
        expected = 1 + beta * np.linalg.eigvalsh(W.to_dense())[0] > 0
        assert is_positive_definite_shift(W, beta) == expected


def test_pd_shift_block_closed_form():
    W = BlockConstantWeights.contiguous(600, 15, 40.0)
    # eigenvalues of I + beta W are 1 + 560 beta and 1 - 40 beta
    assert is_positive_definite_shift(W, 0.02)
    assert not is_positive_definite_shift(W, 0.03)


def _midpoint_violations(f, rng, n, pairs):
    bad = 0
    for _ in range(pairs):
        a, b = random_complex(rng, n), random_complex(rng, n)
        if f(0.5 * (a + b)) > 0.5 * f(a) + 0.5 * f(b) + 1e-10:
            bad += 1
    return bad


def test_convexity_below_limit(rng):
    for _ in range(30):
        n = int(rng.integers(2, 16))
        W = random_dense_weights(rng, n, scale=3.0)
        limit = strict_convexity_lambda_limit(W)
        lam = rng.uniform(0.1, 0.99) * (limit if math.isfinite(limit) else 10.0)
        spec = ProxSpec(random_complex(rng, n), lam, W)
        assert _midpoint_violations(lambda x: objective_D(x, spec), rng, n, 50) == 0
        weak = lambda x: np.vdot(x, x).real / (2 * lam) + eval_weighted_swag(x, W)  # noqa: E731
        assert _midpoint_violations(weak, rng, n, 50) == 0


def test_nonconvex_beyond_limit():
    # the penalty alone is not convex: the midpoint of (1, 0) and (0, 1) is penalized more
    W = DenseWeights([[0, 4.0], [4.0, 0]])
    a, b = np.array([1, 0], complex), np.array([0, 1], complex)
    assert eval_weighted_swag(0.5 * (a + b), W) > 0.5 * eval_weighted_swag(a, W) + 0.5 * eval_weighted_swag(b, W)


def test_penalty_spec():
    assert PenaltySpec(2.0)([3 + 4j]) == pytest.approx(10)
    assert PenaltySpec(2.0, W2)([1, -2j]) == pytest.approx(8)
    assert PenaltySpec(1.0).kind == "l1"
    with pytest.raises(ConfigurationError):
        PenaltySpec(-1.0)
