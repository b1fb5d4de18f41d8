import dataclasses
import math

import numpy as np
import pytest

from wswag import io
from wswag.benchmark import (
    BenchmarkConfig,
    add_noise,
    build_problem,
    default_l1_grid,
    grid_block_weights,
    grid_toeplitz_weights,
    run_benchmark,
    snr_db,
    sweep_l1,
    synth_signal,
    toeplitz_profile,
    translation_probe,
)
from wswag.numerics import BlockConstantWeights, ConfigurationError, ToeplitzWeights, phase_of

SMALL = BenchmarkConfig(bands=32, frames=24, harmonic_spacing=6, fundamental_band=9, l1_grid_points=6, max_outer=200)


def test_synth_signal_examples(tmp_path):
    assert not np.any(synth_signal(dataclasses.replace(SMALL, harmonic_count=0)))
    grid = synth_signal(BenchmarkConfig())
    assert grid.shape == (64, 128)
    assert np.count_nonzero(np.sum(np.abs(grid) ** 2, axis=1)) == 3
    io.write_complex_csv(tmp_path / "a.csv", synth_signal(SMALL).ravel())
    io.write_complex_csv(tmp_path / "b.csv", synth_signal(SMALL).ravel())
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_add_noise_examples(rng):
    grid = rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16))
    for target in (5.0, -3.0, 20.0):
        assert abs(snr_db(grid, add_noise(grid, target, seed=1)) - target) <= 0.01
    np.testing.assert_array_equal(add_noise(grid, math.inf, seed=1), grid)
    np.testing.assert_array_equal(add_noise(grid, 5.0, seed=3), add_noise(grid, 5.0, seed=3))
    assert not np.array_equal(add_noise(grid, 5.0, seed=3), add_noise(grid, 5.0, seed=4))
    with pytest.raises(ConfigurationError):
        add_noise(np.zeros(4), 5.0)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        BenchmarkConfig.from_dict({"bands": 16, "colour": "blue"})
    with pytest.raises(ConfigurationError):
        BenchmarkConfig(bands=16)  # harmonics do not fit
    cfg = BenchmarkConfig.from_dict(SMALL.to_dict())
    assert cfg == SMALL and cfg.digest() == SMALL.digest()
    assert BenchmarkConfig().row_sum == pytest.approx(60)


def test_toeplitz_profile_row_sum():
    p = toeplitz_profile(8, 60.0)
    assert p[0] == 0 and np.all(np.diff(p[1:]) < 0)
    W = ToeplitzWeights(np.concatenate([p, np.zeros(40)]))
    assert W.max_row_sum() == pytest.approx(60)
    assert W.row_sums()[20] == pytest.approx(60)


def test_grid_weights_match_kronecker():
    bands, frames = 7, 3
    p = toeplitz_profile(3, 6.0)
    W = grid_toeplitz_weights(p, bands, frames)
    band_w = ToeplitzWeights(np.concatenate([p, np.zeros(bands - p.size)])).to_dense()
    np.testing.assert_array_equal(W.to_dense(), np.kron(band_w, np.eye(frames)))
    B = grid_block_weights(3, 2.0, bands, frames)
    band_b = BlockConstantWeights.contiguous(bands, 3, 2.0).to_dense()
    np.testing.assert_array_equal(B.to_dense(), np.kron(band_b, np.eye(frames)))


def test_sweep_examples():
    problem = build_problem(SMALL)
    grid = default_l1_grid(problem)
    w, s, table = sweep_l1(problem, [grid[2]])
    assert w == grid[2] and table == [(grid[2], s)]
    forward = sweep_l1(problem, grid)
    backward = sweep_l1(problem, grid[::-1])
    assert forward == backward
    best, _, _ = sweep_l1(problem, np.concatenate([[0.0], grid]))
    assert best > 0


def test_sweep_ties_prefer_smaller_weight():
    problem = build_problem(SMALL)
    top = default_l1_grid(problem)[-1]
    # both weights are past the point where x = 0, so the SNRs tie at 0 dB
    w, s, _ = sweep_l1(problem, [3 * top, 2 * top])
    assert w == 2 * top and s == 0


@pytest.fixture(scope="module")
def small_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    return run_benchmark(SMALL, out), out


def test_benchmark_traces_and_phase(small_report):
    report, _ = small_report
    assert set(report.results) == {"l1", "block_swag", "weighted_swag"}
    for r in report.results.values():
        t = r.objective_trace
        assert np.all(t[1:] <= t[:-1] + 1e-10 * (1 + np.abs(t[:-1])))
    sol = report.results["weighted_swag"].report
    nz = sol.final_x != 0
    np.testing.assert_allclose(phase_of(sol.final_x)[nz], phase_of(sol.last_z)[nz], atol=1e-12)
    assert report.results["block_swag"].lam == pytest.approx(report.l1_weight / 4)


def test_benchmark_is_byte_deterministic(small_report, tmp_path):
    _, first = small_report
    run_benchmark(SMALL, tmp_path)
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in tmp_path.iterdir())
    assert "report.json" in names
    for name in names:
        assert (first / name).read_bytes() == (tmp_path / name).read_bytes(), name


def test_translation_probe_small():
    cfg = dataclasses.replace(SMALL, harmonic_count=2, fundamental_band=10)
    assert translation_probe(cfg, 3, 0.05, "weighted_swag") <= 1e-6
    assert translation_probe(cfg, 0, 0.05, "block_swag") <= 1e-12
    with pytest.raises(ConfigurationError):
        translation_probe(dataclasses.replace(SMALL, fundamental_band=2), 1, 0.05)
