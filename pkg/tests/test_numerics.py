import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import random_dense_weights
from wswag import io
from wswag.numerics import (
    BlockConstantWeights,
    ConfigurationError,
    DenseWeights,
    ToeplitzWeights,
    magnitude,
    matvec,
    max_row_sum,
    phase_of,
    quadratic_form,
    spectral_norm_estimate,
    zero_weights,
)

W2 = DenseWeights([[0, 0.5], [0.5, 0]])


def test_magnitude_examples():
    np.testing.assert_array_equal(magnitude([0, 0]), [0, 0])
    np.testing.assert_allclose(magnitude([3 + 4j, -2]), [5, 2])
    np.testing.assert_allclose(magnitude([1j, -1j]), [1, 1])


def test_phase_examples():
    np.testing.assert_array_equal(phase_of([5, 0]), [1, 1])
    np.testing.assert_allclose(phase_of([3 + 4j]), [0.6 + 0.8j])
    np.testing.assert_allclose(phase_of([-2]), [-1])


# subnormal magnitudes lose relative precision, so keep to normal floats and exact zeros
finite = st.floats(-1e6, 1e6, allow_nan=False).filter(lambda v: v == 0 or abs(v) > 1e-150)


@settings(max_examples=200)
@given(hnp.arrays(np.float64, st.integers(1, 20), elements=finite), hnp.arrays(np.float64, 20, elements=finite))
def test_phase_reconstructs(re, im):
    z = re + 1j * im[: re.size]
    p = phase_of(z)
    nz = z != 0
    np.testing.assert_allclose(np.abs(p[nz]), 1, rtol=1e-12)
    np.testing.assert_allclose(magnitude(z) * p, z, rtol=1e-12, atol=0)


def test_matvec_examples():
    np.testing.assert_array_equal(matvec(zero_weights(3), [1.0, -2.0, 5.0]), 0)
    np.testing.assert_allclose(matvec(W2, [2, 4]), [2, 1])
    blk = BlockConstantWeights.from_partition([[0, 1], [2]], 3.0)
    np.testing.assert_allclose(matvec(blk, [1, 1, 1]), [3, 3, 0])


def test_quadratic_form_examples():
    assert quadratic_form(W2, [0, 0]) == 0
    assert quadratic_form(W2, [1, 2]) == pytest.approx(2)
    assert quadratic_form(BlockConstantWeights([0, 0, 0], 1.0), [1, 1, 1]) == pytest.approx(6)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        matvec(W2, [1, 2, 3])
    with pytest.raises(ValueError):
        quadratic_form(ToeplitzWeights([0, 1, 0]), [1, 2])


@pytest.mark.parametrize(
    "matrix",
    [
        [[0, 1], [2, 0]],  # asymmetric
        [[0, -1], [-1, 0]],  # negative
        [[1, 0], [0, 0]],  # nonzero diagonal
        [[0, 1, 2]],  # not square
    ],
)
def test_dense_validation(matrix):
    with pytest.raises(ConfigurationError):
        DenseWeights(matrix)


def test_toeplitz_validation():
    with pytest.raises(ConfigurationError):
        ToeplitzWeights([1.0, 0.5])
    with pytest.raises(ConfigurationError):
        ToeplitzWeights([0.0, -0.5])


def test_partition_validation():
    with pytest.raises(ConfigurationError):
        BlockConstantWeights.from_partition([[0, 1], [1, 2]], 1.0, n=3)
    with pytest.raises(ConfigurationError):
        BlockConstantWeights.from_partition([[0, 1]], 1.0, n=3)
    with pytest.raises(ConfigurationError):
        BlockConstantWeights([0, 0], -1.0)


def test_structured_matvec_matches_dense(rng):
    for _ in range(20):
        n = int(rng.integers(2, 60))
        col = rng.uniform(0, 2, n) * (rng.uniform(size=n) < 0.3)
        col[0] = 0
        structures = [
            ToeplitzWeights(col),
            BlockConstantWeights(rng.integers(0, 5, n), rng.uniform(0, 4)),
        ]
        for W in structures:
            D = W.to_dense()
            np.testing.assert_array_equal(D, D.T)
            assert np.all(np.diag(D) == 0)
            for _ in range(100):
                v = rng.standard_normal(n)
                ref = D @ v
                np.testing.assert_allclose(W.matvec(v), ref, rtol=1e-12, atol=1e-12 * np.max(np.abs(ref), initial=1))


def test_quadratic_form_nonnegative(rng):
    for _ in range(100):
        W = random_dense_weights(rng, int(rng.integers(1, 20)))
        v = rng.standard_normal(W.n)
        # pairs with |v| on both sides
        assert quadratic_form(W, np.abs(v)) >= 0


def test_max_row_sum_examples():
    assert max_row_sum(zero_weights(4)) == 0
    blk = BlockConstantWeights.contiguous(60, 15, 40.0)
    assert max_row_sum(blk) == 560
    assert max_row_sum(blk) == pytest.approx(np.max(blk.to_dense().sum(axis=1)))


def test_max_row_sum_toeplitz_exact(rng):
    for _ in range(30):
        n = int(rng.integers(1, 40))
        col = rng.uniform(0, 1, n)
        col[0] = 0
        W = ToeplitzWeights(col)
        assert max_row_sum(W) == pytest.approx(np.max(W.to_dense().sum(axis=1)), rel=1e-12)


def test_toeplitz_interior_row_sum():
    # one-sided profile summing to 450 -> interior rows see it twice
    profile = np.zeros(50)
    profile[1:11] = 45.0
    W = ToeplitzWeights(np.concatenate([profile, np.zeros(50)]))
    rows = W.row_sums()
    assert max_row_sum(W) == pytest.approx(900)
    assert np.all(rows[10:-10] == pytest.approx(900))
    assert np.all(rows <= 900 + 1e-9)


def test_spectral_norm_examples():
    assert spectral_norm_estimate(zero_weights(3)).value == 0
    assert spectral_norm_estimate(W2, tol=1e-12).value == pytest.approx(0.5, abs=1e-10)
    est = spectral_norm_estimate(BlockConstantWeights([0, 0, 0], 1.0), tol=1e-12)
    assert est.converged
    assert est.value == pytest.approx(2, abs=1e-10)


def test_spectral_norm_gershgorin(rng):
    for _ in range(100):
        W = random_dense_weights(rng, int(rng.integers(2, 30)), scale=rng.uniform(0.1, 10))
        est = spectral_norm_estimate(W)
        assert est.value <= max_row_sum(W) * (1 + 1e-9)
        assert est.value == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(W.to_dense()))), rel=1e-6)


def test_spectral_norm_bipartite_does_not_oscillate():
    # path graph: eigenvalues come in +/- pairs
    A = np.diag(np.ones(5), 1)
    W = DenseWeights(A + A.T)
    est = spectral_norm_estimate(W, tol=1e-13, max_iter=100_000)
    assert est.converged
    assert est.value == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(W.to_dense()))), rel=1e-6)


def test_spectral_norm_nonconvergence_flag(rng):
    W = random_dense_weights(rng, 30)
    est = spectral_norm_estimate(W, tol=1e-15, max_iter=2)
    assert not est.converged
    assert est.value > 0


def test_complex_csv_roundtrip(tmp_path, rng):
    x = rng.standard_normal(50) * 10.0 ** rng.integers(-300, 300, 50) + 1j * rng.standard_normal(50)
    path = tmp_path / "x.csv"
    io.write_complex_csv(path, x)
    assert path.read_text().splitlines()[0] == "re,im"
    np.testing.assert_array_equal(io.read_complex_csv(path), x)


def test_weights_roundtrip(tmp_path, rng):
    col = rng.uniform(0, 1, 7)
    col[0] = 0
    cases = [
        random_dense_weights(rng, 5),
        ToeplitzWeights(col),
        BlockConstantWeights([0, 0, 1, 1, 1, 2], np.pi),
    ]
    for W in cases:
        path = tmp_path / "w.txt"
        io.write_weights(path, W)
        back = io.read_weights(path)
        assert type(back) is type(W)
        np.testing.assert_array_equal(back.to_dense(), W.to_dense())


def test_taps_roundtrip(tmp_path, rng):
    taps = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    io.write_taps(tmp_path / "t.csv", taps)
    np.testing.assert_array_equal(io.read_taps(tmp_path / "t.csv"), taps)
