import math

import numpy as np
import pytest

from conormal_lab.errors import QuadratureFailure
from conormal_lab.quadrature import gauss_kronrod


def test_polynomial_exact():
    val, err = gauss_kronrod(lambda x: x**5 - 3 * x**2, 0.0, 2.0)
    assert val == pytest.approx(64 / 6 - 8, rel=1e-14)


def test_oscillatory():
    val, _ = gauss_kronrod(lambda s: np.exp(2j * s), 0.0, 50.0, rel_tol=1e-12, max_panel=math.pi / 8)
    assert abs(val - (np.exp(100j) - 1) / 2j) < 1e-11


def test_endpoint_singularity():
    val, _ = gauss_kronrod(lambda x: x**-0.5, 0.0, 1.0, rel_tol=1e-10)
    assert val == pytest.approx(2.0, rel=1e-9)


def test_breakpoints_and_reversed_interval():
    f = lambda x: np.abs(x - 0.3)  # noqa: E731
    val, _ = gauss_kronrod(f, 0.0, 1.0, breakpoints=[0.3])
    assert val == pytest.approx(0.045 + 0.245, rel=1e-14)
    back, _ = gauss_kronrod(f, 1.0, 0.0, breakpoints=[0.3])
    assert back == pytest.approx(-val, rel=1e-14)


def test_budget_exhausted():
    with pytest.raises(QuadratureFailure):
        gauss_kronrod(lambda x: np.sin(1 / x), 1e-9, 1.0, rel_tol=1e-14, max_evals=2000)
