"""Synthetic dereverberation benchmark comparing l1, block and Toeplitz-weighted penalties.

A sparse harmonic time-frequency grid is filtered band by band with short
exponentially decaying random-phase filters, corrupted with circular complex
Gaussian noise at a prescribed SNR, and reconstructed by
``min_x 0.5 ||y - H x||^2 + lam * P(x)`` for three choices of ``P``.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .io import fmt, write_grid_csv
from .numerics import (
    BlockConstantWeights,
    ConfigurationError,
    NumericalError,
    ToeplitzWeights,
    WeightMatrix,
)
from .operators import BandConvolution, least_squares_objective
from .solver import SmoothObjective, SolveReport, SolverConfig, mm_solve

__all__ = [
    "BenchmarkConfig",
    "Problem",
    "BenchmarkReport",
    "synth_signal",
    "reverb_taps",
    "add_noise",
    "snr_db",
    "toeplitz_profile",
    "grid_toeplitz_weights",
    "grid_block_weights",
    "build_problem",
    "sweep_l1",
    "run_benchmark",
    "translation_probe",
    "PENALTIES",
]

logger = logging.getLogger(__name__)

PENALTIES = ("l1", "block_swag", "weighted_swag")
# reference scale: 960 bands with a profile summing to 900
_REF_BANDS, _REF_ROW_SUM = 960, 900.0


@dataclass(frozen=True)
class BenchmarkConfig:
    bands: int = 64
    frames: int = 128
    harmonic_count: int = 3
    harmonic_spacing: int = 12
    fundamental_band: int = 10
    amplitude: float = 1.0
    filter_length: int = 8
    filter_decay: float = 0.5
    shared_taps: bool = False
    input_snr_db: float = 5.0
    l1_grid: tuple[float, ...] | None = None
    l1_grid_points: int = 20
    swag_fraction: float = 0.25
    block_group_size: int = 15
    block_gamma: float = 40.0
    toeplitz_support: int = 8
    toeplitz_row_sum: float | None = None
    penalties: tuple[str, ...] = PENALTIES
    inner_iters: int = 10
    max_outer: int = 500
    rel_tol: float = 1e-9
    workers: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.bands < 1 or self.frames < 1:
            raise ConfigurationError("bands and frames must be positive")
        if self.harmonic_count < 0 or self.harmonic_spacing < 1:
            raise ConfigurationError("harmonic_count must be >= 0 and harmonic_spacing >= 1")
        if self.harmonic_count and self.fundamental_band + (self.harmonic_count - 1) * self.harmonic_spacing >= self.bands:
            raise ConfigurationError("harmonics do not fit in the band range")
        if not 1 <= self.filter_length <= self.frames:
            raise ConfigurationError("filter_length must be in 1..frames")
        if not 0 <= self.filter_decay < 1:
            raise ConfigurationError("filter_decay must be in [0, 1)")
        if self.block_group_size < 1 or self.block_gamma < 0:
            raise ConfigurationError("invalid block penalty parameters")
        if self.toeplitz_support < 0 or (self.toeplitz_row_sum is not None and self.toeplitz_row_sum < 0):
            raise ConfigurationError("invalid Toeplitz profile parameters")
        if self.l1_grid is not None and (len(self.l1_grid) == 0 or min(self.l1_grid) < 0):
            raise ConfigurationError("l1_grid must be a non-empty list of nonnegative weights")
        if self.swag_fraction <= 0:
            raise ConfigurationError("swag_fraction must be positive")
        unknown = set(self.penalties) - set(PENALTIES)
        if unknown or not self.penalties:
            raise ConfigurationError(f"penalties must be a non-empty subset of {PENALTIES}, got {self.penalties}")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("l1_grid", "penalties"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("l1_grid", "penalties"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def row_sum(self) -> float:
        if self.toeplitz_row_sum is not None:
            return self.toeplitz_row_sum
        return _REF_ROW_SUM * self.bands / _REF_BANDS


def _seeds(seed: int):
    signal, taps, noise = np.random.SeedSequence(seed).spawn(3)
    return signal, taps, noise


def synth_signal(config: BenchmarkConfig) -> np.ndarray:
    """Clean ``bands x frames`` grid with ``harmonic_count`` active bands.

    Harmonic ``k`` sits at band ``fundamental_band + k * harmonic_spacing`` with
    amplitude ``amplitude / (k + 1)`` and a slow, strictly positive envelope;
    every coefficient carries an independent uniform random phase.
    """
    grid = np.zeros((config.bands, config.frames), dtype=complex)
    if config.harmonic_count == 0:
        return grid
    rng = np.random.default_rng(_seeds(config.rng_seed)[0])
    t = np.arange(config.frames)
    for k in range(config.harmonic_count):
        band = config.fundamental_band + k * config.harmonic_spacing
        offset = rng.uniform(0, 2 * np.pi)
        cycles = rng.uniform(1.0, 3.0)
        envelope = 0.6 + 0.4 * np.cos(2 * np.pi * cycles * t / config.frames + offset)
        phases = rng.uniform(0, 2 * np.pi, size=config.frames)
        grid[band] = config.amplitude / (k + 1) * envelope * np.exp(1j * phases)
    return grid


def reverb_taps(config: BenchmarkConfig) -> np.ndarray:
    """Per-band filters ``h[0] = 1``, ``h[k] = decay^k e^{j phi}`` (one shared row if ``shared_taps``)."""
    rng = np.random.default_rng(_seeds(config.rng_seed)[1])
    rows = 1 if config.shared_taps else config.bands
    k = np.arange(config.filter_length)
    phases = rng.uniform(0, 2 * np.pi, size=(rows, config.filter_length))
    phases[:, 0] = 0.0
    return config.filter_decay ** k * np.exp(1j * phases)


def snr_db(reference, estimate) -> float:
    """``10 log10(||reference||^2 / ||estimate - reference||^2)``."""
    reference = np.asarray(reference)
    err = np.asarray(estimate) - reference
    num = float(np.vdot(reference, reference).real)
    den = float(np.vdot(err, err).real)
    if den == 0:
        return math.inf
    return 10.0 * math.log10(num / den)


def add_noise(grid, target_snr_db: float, seed=None, mask=None) -> np.ndarray:
    """Add circular complex Gaussian noise scaled to hit ``target_snr_db`` exactly.

    The noise is rescaled against its own realized norm, so the achieved SNR
    equals the target up to rounding. ``math.inf`` returns a copy of ``grid``.
    ``mask`` (broadcastable boolean) restricts where noise is drawn.
    """
    grid = np.asarray(grid, dtype=complex)
    if math.isinf(target_snr_db) and target_snr_db > 0:
        return grid.copy()
    power = float(np.vdot(grid, grid).real)
    if power == 0:
        raise ConfigurationError("SNR is undefined for an all-zero signal")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noise = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) / np.sqrt(2)
    if mask is not None:
        noise = noise * np.broadcast_to(mask, grid.shape)
    scale = math.sqrt(power / (float(np.vdot(noise, noise).real) * 10 ** (target_snr_db / 10)))
    return grid + scale * noise


def toeplitz_profile(support: int, row_sum: float) -> np.ndarray:
    """Linearly decaying lags ``1..support`` scaled so that an interior row sums to ``row_sum``.

    An interior row of the symmetric Toeplitz matrix sees every lag twice, so
    the one-sided profile sums to ``row_sum / 2``. Entry 0 (the diagonal) is 0.
    """
    p = np.zeros(support + 1)
    if support == 0 or row_sum == 0:
        return p
    p[1:] = np.arange(support, 0, -1, dtype=float)
    p *= row_sum / (2 * p.sum())
    return p


def grid_toeplitz_weights(profile, bands: int, frames: int) -> ToeplitzWeights:
    """Toeplitz coupling along the band axis of a band-major flattened grid.

    Bands ``b`` and ``b'`` of the same frame are ``|b - b'| * frames`` apart in
    the flattened vector, and entries of different frames never are, so a
    Toeplitz column supported on multiples of ``frames`` couples each frequency
    slice independently with the same profile.
    """
    profile = np.asarray(profile, dtype=float)
    if profile.size > bands:
        raise ConfigurationError("Toeplitz profile longer than the number of bands")
    col = np.zeros(bands * frames)
    col[: profile.size * frames : frames] = profile
    return ToeplitzWeights(col)


def grid_block_weights(group_size: int, gamma: float, bands: int, frames: int) -> BlockConstantWeights:
    """Groups of ``group_size`` consecutive bands within each frame."""
    b, t = np.divmod(np.arange(bands * frames), frames)
    return BlockConstantWeights((b // group_size) * frames + t, gamma)


@dataclass
class Problem:
    config: BenchmarkConfig
    clean: np.ndarray
    H: BandConvolution
    y: np.ndarray
    f: SmoothObjective

    @property
    def shape(self) -> tuple[int, int]:
        return self.config.bands, self.config.frames

    def grid(self, x) -> np.ndarray:
        return np.asarray(x).reshape(self.shape)

    def output_snr(self, x) -> float:
        return snr_db(self.clean.ravel(), np.asarray(x).ravel())

    def weights(self, penalty: str) -> WeightMatrix | None:
        c = self.config
        if penalty == "l1":
            return None
        if penalty == "block_swag":
            return grid_block_weights(c.block_group_size, c.block_gamma, c.bands, c.frames)
        if penalty == "weighted_swag":
            return grid_toeplitz_weights(toeplitz_profile(c.toeplitz_support, c.row_sum), c.bands, c.frames)
        raise ConfigurationError(f"unknown penalty {penalty!r}")

    def solve(self, lam: float, penalty: str = "l1") -> SolveReport:
        c = self.config
        cfg = SolverConfig(
            lam=lam,
            weights=self.weights(penalty),
            inner_iters=c.inner_iters,
            max_outer=c.max_outer,
            rel_tol=c.rel_tol,
        )
        return mm_solve(self.f, cfg)


def build_problem(config: BenchmarkConfig, clean=None, noise_mask=None, taps=None) -> Problem:
    clean = synth_signal(config) if clean is None else np.asarray(clean, dtype=complex)
    H = BandConvolution(reverb_taps(config) if taps is None else taps, config.bands, config.frames)
    reverberant = H.apply(clean.ravel()).reshape(clean.shape)
    rng = np.random.default_rng(_seeds(config.rng_seed)[2])
    y = add_noise(reverberant, config.input_snr_db, rng, mask=noise_mask).ravel()
    return Problem(config, clean, H, y, least_squares_objective(H, y))


def default_l1_grid(problem: Problem) -> np.ndarray:
    """``l1_grid_points`` log-spaced weights from 1e-3 to 1 times ``||H^* y||_inf``.

    The upper end is the smallest weight for which ``x = 0`` solves the l1 problem.
    """
    top = float(np.max(np.abs(problem.H.adjoint(problem.y))))
    return top * np.logspace(-3, 0, problem.config.l1_grid_points)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sweep_l1(problem: Problem, grid_of_weights, workers: int = 1):
    """Best l1 weight by output SNR.

    Returns ``(best_weight, best_snr, table)`` where ``table`` lists
    ``(weight, snr)`` in increasing weight order. Ties go to the smaller weight,
    so the result does not depend on the order of ``grid_of_weights``.
    """
    weights = sorted(float(w) for w in grid_of_weights)
    if not weights:
        raise ConfigurationError("empty l1 weight grid")
    snrs = _map(lambda w: problem.output_snr(problem.solve(w, "l1").final_x), weights, workers)
    best_w, best_snr = weights[0], snrs[0]
    for w, s in zip(weights[1:], snrs[1:]):
        if s > best_snr:
            best_w, best_snr = w, s
    return best_w, best_snr, list(zip(weights, snrs))


@dataclass
class PenaltyResult:
    penalty: str
    lam: float
    snr_db: float
    objective_trace: np.ndarray
    outer_iterations: int
    termination: str
    wall_time: float
    report: SolveReport = field(repr=False)


@dataclass
class BenchmarkReport:
    config: BenchmarkConfig
    observation_snr_db: float
    observation_snr_vs_clean_db: float
    l1_sweep: list
    l1_weight: float
    results: dict
    wall_time: float
    files: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def snr_triple(self) -> tuple[float, ...]:
        return tuple(self.results[p].snr_db for p in PENALTIES if p in self.results)

    def to_json_dict(self) -> dict:
        """Everything except timings, so the file is reproducible byte for byte."""
        return {
            "config": self.config.to_dict(),
            "config_digest": self.config.digest(),
            "observation_snr_db": fmt(self.observation_snr_db),
            "observation_snr_vs_clean_db": fmt(self.observation_snr_vs_clean_db),
            "l1_sweep": [[fmt(w), fmt(s)] for w, s in self.l1_sweep],
            "l1_weight": fmt(self.l1_weight),
            "results": {
                name: {
                    "lam": fmt(r.lam),
                    "snr_db": fmt(r.snr_db),
                    "outer_iterations": r.outer_iterations,
                    "termination": r.termination,
                    "objective_trace": [fmt(v) for v in r.objective_trace],
                }
                for name, r in self.results.items()
            },
            "files": self.files,
            "error": self.error,
        }

    def summary(self) -> str:
        lines = [
            f"config digest       {self.config.digest()}  (seed {self.config.rng_seed})",
            f"grid                {self.config.bands} bands x {self.config.frames} frames",
            f"observation SNR     {self.observation_snr_db:.4f} dB (vs reverberant)",
            f"observation SNR     {self.observation_snr_vs_clean_db:.4f} dB (vs clean)",
            f"best l1 weight      {self.l1_weight:.6g}",
        ]
        for name, r in self.results.items():
            lines.append(
                f"{name:<19} lam={r.lam:.6g}  SNR={r.snr_db:.4f} dB  iters={r.outer_iterations} ({r.termination})"
            )
        if self.error:
            lines.append(f"ERROR: {self.error}")
        return "\n".join(lines) + "\n"


def _write_outputs(report: BenchmarkReport, problem: Problem, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {"clean": "clean_magnitude.csv", "observation": "observation_magnitude.csv"}
    write_grid_csv(out_dir / files["clean"], np.abs(problem.clean))
    write_grid_csv(out_dir / files["observation"], np.abs(problem.grid(problem.y)))
    for name, r in report.results.items():
        files[name] = f"{name}_magnitude.csv"
        write_grid_csv(out_dir / files[name], np.abs(problem.grid(r.report.final_x)))
    report.files = files
    (out_dir / "report.json").write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    (out_dir / "summary.txt").write_text(report.summary())


def run_benchmark(config: BenchmarkConfig, out_dir=None) -> BenchmarkReport:
    """Sweep the l1 weight, then solve with each penalty at its weight.

    Block and weighted penalties use ``swag_fraction`` times the best l1 weight.
    When ``out_dir`` is given, magnitude grids, ``report.json`` and
    ``summary.txt`` are written there (also on failure, with the error).
    """
    t0 = time.perf_counter()
    problem = build_problem(config)
    reverberant = problem.H.apply(problem.clean.ravel())
    report = BenchmarkReport(
        config=config,
        observation_snr_db=snr_db(reverberant, problem.y),
        observation_snr_vs_clean_db=problem.output_snr(problem.y),
        l1_sweep=[],
        l1_weight=math.nan,
        results={},
        wall_time=0.0,
    )
    try:
        grid = config.l1_grid if config.l1_grid is not None else default_l1_grid(problem)
        best_w, _, table = sweep_l1(problem, grid, config.workers)
        report.l1_sweep, report.l1_weight = table, best_w
        lams = {"l1": best_w, "block_swag": config.swag_fraction * best_w, "weighted_swag": config.swag_fraction * best_w}

        def run(name):
            sol = problem.solve(lams[name], name)
            return PenaltyResult(
                name, lams[name], problem.output_snr(sol.final_x), sol.objective_trace,
                sol.outer_iterations, sol.termination, sol.wall_time, sol,
            )

        for res in _map(run, [p for p in PENALTIES if p in config.penalties], config.workers):
            report.results[res.penalty] = res
    except NumericalError as exc:
        report.error = str(exc)
        logger.error("benchmark aborted: %s", exc)
        if out_dir is not None:
            _write_outputs(report, problem, Path(out_dir))
        raise
    report.wall_time = time.perf_counter() - t0
    if out_dir is not None:
        _write_outputs(report, problem, Path(out_dir))
    return report


def translation_probe(config: BenchmarkConfig, shift: int, lam: float, penalty: str = "weighted_swag") -> float:
    """Max deviation between the shifted reconstruction and the reconstruction of the shifted data.

    Uses one filter shared by all bands and confines the noise to bands
    ``[margin, bands - margin - shift)`` so the shifted observation is an exact
    band translate of the original. Returns
    ``max |roll(x_hat, shift) - x_hat_shifted|``.
    """
    if shift < 0:
        raise ConfigurationError("shift must be >= 0")
    margin = config.toeplitz_support
    bands = config.bands
    clean = synth_signal(config)
    active = np.flatnonzero(np.any(clean != 0, axis=1))
    if active.size and (active.min() < margin or active.max() >= bands - margin - shift):
        raise ConfigurationError("harmonics too close to the band edges for this shift")
    mask = np.zeros((bands, 1), dtype=bool)
    mask[margin:bands - margin - shift] = True
    taps = reverb_taps(dataclasses.replace(config, shared_taps=True))
    base = build_problem(config, clean=clean, noise_mask=mask, taps=taps)
    y_shift = np.roll(base.grid(base.y), shift, axis=0).ravel()
    shifted = Problem(config, np.roll(clean, shift, axis=0), base.H, y_shift, least_squares_objective(base.H, y_shift, base.f.lipschitz))
    x0 = base.solve(lam, penalty).final_x
    x1 = shifted.solve(lam, penalty).final_x
    return float(np.max(np.abs(np.roll(base.grid(x0), shift, axis=0) - shifted.grid(x1))))
