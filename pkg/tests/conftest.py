import numpy as np
import pytest

from hypfed import _backend


def random_disc(rng, n, r_max=0.9, k=1.0):
    """n points uniform in angle with Euclidean radius below r_max/sqrt(k)."""
    r = r_max / np.sqrt(k) * np.sqrt(rng.uniform(0, 1, n))
    t = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def cayley_dist(x, y, k=1.0):
    """Distance through the arccosh form, independent of Mobius algebra."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    num = 2 * k * np.sum((x - y) ** 2, axis=-1)
    den = (1 - k * np.sum(x * x, axis=-1)) * (1 - k * np.sum(y * y, axis=-1))
    return np.arccosh(1 + num / den) / np.sqrt(k)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["python", "cython"])
def backend(request):
    if request.param == "cython" and not _backend.compiled_available():
        pytest.skip("compiled kernels not built")
    with _backend.using(request.param):
        yield request.param


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
