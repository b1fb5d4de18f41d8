import numpy as np
import pytest

from wswag.numerics import DenseWeights

_ACCEPTANCE_LINES = []


def random_complex(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def random_dense_weights(rng, n, density=0.5, scale=1.0):
    A = rng.uniform(0, scale, size=(n, n)) * (rng.uniform(size=(n, n)) < density)
    A = np.triu(A, 1)
    return DenseWeights(A + A.T)


def soft_threshold(z, level):
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    out = np.zeros_like(z)
    nz = mag > 0
    out[nz] = np.maximum(mag[nz] - level, 0) * z[nz] / mag[nz]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_log():
    def record(name, passed, detail):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        print(_ACCEPTANCE_LINES[-1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
