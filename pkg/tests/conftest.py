import numpy as np
import pytest

from seqfrac.frac_core import FracOrderPair
from seqfrac.solver import Linear, Semilinear, SystemSpec

ORDER_CHOICES = (0.3, 0.5, 1.0)
STEP_CHOICES = (0.1, 0.5, 1.0)


def random_spec(rng, N=50, forced=False, dim=None, orders=None, h=None):
    """Random problem drawn per the solver-equivalence protocol."""
    d = int(rng.integers(1, 5)) if dim is None else dim
    if orders is None:
        orders = FracOrderPair(float(rng.choice(ORDER_CHOICES)), float(rng.choice(ORDER_CHOICES)))
    h = float(rng.choice(STEP_CHOICES)) if h is None else h
    A = rng.uniform(-1, 1, (d, d))
    x_a = rng.uniform(-1, 1, d)
    x_0 = rng.uniform(-1, 1, d)
    rhs = Semilinear(A, rng.uniform(-1, 1, (N + 1, d))) if forced else Linear(A)
    return SystemSpec(d, orders, h, N, rhs, x_a, x_0)


def rel_err(got, ref):
    got, ref = np.asarray(got, float), np.asarray(ref, float)
    return float(np.max(np.abs(got - ref) / np.maximum(1.0, np.abs(ref))))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
