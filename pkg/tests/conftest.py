import numpy as np
import pytest

from einstein_core.tensor import DenseTensor, TensorShape
from einstein_core.testkit import Xoshiro256

# (criterion number, passed, message) rows appended by test_acceptance.py
ACCEPTANCE_LINES = []

SQUARE_SHAPES = [
    TensorShape((2,), (2,)),
    TensorShape((2, 2), (2, 2)),
    TensorShape((2, 3), (2, 3)),
    TensorShape((3, 3), (3, 3)),
]


def random_tensor(shape: TensorShape, seed: int) -> DenseTensor:
    rng = Xoshiro256(seed)
    return DenseTensor(rng.complex_normal(shape.dims), shape)


@pytest.fixture
def rng():
    return Xoshiro256(20240101)


@pytest.fixture
def rand():
    """Factory for seeded complex Gaussian tensors."""
    return random_tensor


def assert_close(x, y, tol):
    a = x.data if isinstance(x, DenseTensor) else np.asarray(x)
    b = y.data if isinstance(y, DenseTensor) else np.asarray(y)
    assert a.shape == b.shape
    err = float(np.max(np.abs(a - b))) if a.size else 0.0
    assert err <= tol, f"max abs difference {err:.3e} exceeds {tol:.1e}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, msg in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {msg}")
