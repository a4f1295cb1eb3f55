import numpy as np
import pytest

from tetrapol.stokes import JonesVector

ACCEPTANCE_LINES: list[str] = []


def random_jones(rng, n):
    """Haar-random normalized Jones vectors."""
    z = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return [JonesVector(a, b) for a, b in z]


def random_density(rng, n):
    """Random mixed qubit states, including near-pure ones."""
    out = []
    for _ in range(n):
        r = rng.normal(size=3)
        r *= rng.uniform(0, 1) ** (1 / 3) / np.linalg.norm(r)
        out.append(0.5 * np.array([[1 + r[0], r[1] - 1j * r[2]],
                                   [r[1] + 1j * r[2], 1 - r[0]]]))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
