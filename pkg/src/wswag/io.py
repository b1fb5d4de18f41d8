"""Plain-text file formats for signals, weight matrices and filter taps.

All floats are written with 17 significant digits so a write/read round trip
is lossless.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .numerics import (
    BlockConstantWeights,
    ConfigurationError,
    DenseWeights,
    ToeplitzWeights,
    WeightMatrix,
)

__all__ = [
    "write_complex_csv",
    "read_complex_csv",
    "write_weights",
    "read_weights",
    "write_taps",
    "read_taps",
    "write_grid_csv",
    "fmt",
]


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_complex_csv(path, x) -> None:
    """One ``re,im`` row per entry, with a header line."""
    x = np.asarray(x, dtype=complex).ravel()
    with open(path, "w", newline="") as fh:
        fh.write("re,im\n")
        for v in x:
            fh.write(f"{fmt(v.real)},{fmt(v.imag)}\n")


def read_complex_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["re", "im"]:
        raise ConfigurationError(f"{path}: expected header 're,im'")
    try:
        data = np.array([[float(a), float(b)] for a, b in (r for r in rows[1:] if r)])
    except ValueError as exc:
        raise ConfigurationError(f"{path}: malformed row ({exc})") from None
    if data.size == 0:
        raise ConfigurationError(f"{path}: no entries")
    return data[:, 0] + 1j * data[:, 1]


def write_weights(path, W: WeightMatrix) -> None:
    """Dense: CSV grid. Toeplitz: one value per line. Block-constant: ``gamma`` line plus one group id per line."""
    path = Path(path)
    if isinstance(W, DenseWeights):
        with open(path, "w") as fh:
            for row in W.matrix:
                fh.write(",".join(fmt(v) for v in row) + "\n")
    elif isinstance(W, ToeplitzWeights):
        with open(path, "w") as fh:
            for v in W.column:
                fh.write(fmt(v) + "\n")
    elif isinstance(W, BlockConstantWeights):
        with open(path, "w") as fh:
            fh.write(f"gamma {fmt(W.gamma)}\n")
            for g in W.labels:
                fh.write(f"{g}\n")
    else:
        raise TypeError(f"cannot serialize {type(W).__name__}")


def read_weights(path, kind: str | None = None) -> WeightMatrix:
    """Read a weight file; ``kind`` is ``dense``, ``toeplitz`` or ``block``, inferred when omitted."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ConfigurationError(f"{path}: empty weight file")
    if kind is None:
        if any(ln.lower().startswith("gamma") for ln in lines):
            kind = "block"
        elif all("," not in ln for ln in lines):
            kind = "toeplitz"
        else:
            kind = "dense"
    try:
        if kind == "block":
            gamma, labels = None, []
            for ln in lines:
                if ln.lower().startswith("gamma"):
                    gamma = float(ln[5:].strip(" ,=:"))
                else:
                    labels.append(ln)
            if gamma is None:
                raise ConfigurationError(f"{path}: missing gamma line")
            try:
                ids = np.array([int(v) for v in labels])
            except ValueError:
                ids = np.array(labels)
            return BlockConstantWeights(ids, gamma)
        if kind == "toeplitz":
            return ToeplitzWeights([float(ln.split(",")[0]) for ln in lines])
        if kind == "dense":
            return DenseWeights([[float(v) for v in ln.split(",")] for ln in lines])
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"{path}: {exc}") from None
    raise ConfigurationError(f"unknown weight kind {kind!r}")


def write_taps(path, taps) -> None:
    """One row per band: ``re,im`` pairs for every tap."""
    h = np.atleast_2d(np.asarray(taps, dtype=complex))
    with open(path, "w") as fh:
        for row in h:
            fh.write(",".join(f"{fmt(v.real)},{fmt(v.imag)}" for v in row) + "\n")


def read_taps(path) -> np.ndarray:
    rows = []
    for ln in Path(path).read_text().splitlines():
        if not ln.strip():
            continue
        vals = [float(v) for v in ln.split(",")]
        if len(vals) % 2:
            raise ConfigurationError(f"{path}: odd number of values in a taps row")
        rows.append(np.array(vals[0::2]) + 1j * np.array(vals[1::2]))
    if not rows or len({r.size for r in rows}) != 1:
        raise ConfigurationError(f"{path}: taps rows must be non-empty and of equal length")
    return np.vstack(rows)


def write_grid_csv(path, grid) -> None:
    """Real-valued grid (e.g. magnitudes), one CSV row per band."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    with open(path, "w") as fh:
        for row in grid:
            fh.write(",".join(fmt(v) for v in row) + "\n")
