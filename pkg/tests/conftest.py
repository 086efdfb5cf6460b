from fractions import Fraction

import numpy as np
import pytest

from fraclab import Ifs

THIRD = 1.0 / 3.0
TWO_THIRDS = 2.0 / 3.0


def homogeneous(lam, translations, weights=None, name=None):
    t = np.asarray(translations, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    return Ifs.from_arrays(lam, t, weights, name)


@pytest.fixture
def cantor():
    return homogeneous(THIRD, [0.0, TWO_THIRDS], name="cantor")


@pytest.fixture
def corner():
    return homogeneous(THIRD, [[0, 0], [TWO_THIRDS, 0], [0, TWO_THIRDS]], name="corner")


@pytest.fixture
def five_corners():
    t = [[0, 0, 0], [TWO_THIRDS, 0, 0], [0, TWO_THIRDS, 0], [0, 0, TWO_THIRDS],
         [TWO_THIRDS, TWO_THIRDS, TWO_THIRDS]]
    return homogeneous(THIRD, t, name="five corners")


@pytest.fixture
def cube():
    t = [[a, b, c] for a in (0, 0.5) for b in (0, 0.5) for c in (0, 0.5)]
    return homogeneous(0.5, t, name="cube")


@pytest.fixture
def touching():
    return homogeneous(0.5, [0.0, 0.5])


@pytest.fixture
def overlapping():
    return homogeneous(0.6, [0.0, 0.4])


@pytest.fixture
def duplicate():
    return homogeneous(0.5, [0.0, 0.0])


def exact(x: float, frac: str) -> bool:
    return abs(x - float(Fraction(frac))) < 1e-12


# criterion number -> (passed, detail), filled by test_acceptance and reported at the end of the run
ACCEPTANCE: dict = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
