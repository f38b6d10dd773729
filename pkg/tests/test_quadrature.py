import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from stripext.quadrature import (QuadratureError, adaptive_gk, gl_panels,
                                 oscillatory_panels)


def test_gk_smooth():
    r = adaptive_gk(np.sin, 0.0, math.pi)
    assert_allclose(r.value, 2.0, rtol=1e-12)
    assert r.error < 1e-9


def test_gk_complex_full_period():
    r = adaptive_gk(lambda z: np.exp(2j * math.pi * z), 0.0, 1.0)
    assert abs(r.value) < 1e-13


def test_gk_endpoint_singularity_with_breakpoints():
    br = 2.0 ** -np.arange(1, 40)
    r = adaptive_gk(np.sqrt, 0.0, 1.0, rtol=1e-11, breakpoints=br)
    assert_allclose(r.value, 2 / 3, rtol=1e-10)


def test_gk_depth_exhaustion_raises():
    with pytest.raises(QuadratureError):
        adaptive_gk(lambda x: 1 / x, 0.0, 1.0, max_depth=6)


def test_gk_rejects_non_finite():
    with pytest.raises(FloatingPointError):
        adaptive_gk(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


def test_gl_panels_polynomial_exact():
    x, w = gl_panels(-1.0, 3.0, 3)
    assert_allclose(np.sum(w * x ** 9), (3.0 ** 10 - 1) / 10, rtol=1e-13)


def test_oscillatory_panels_linear_phase():
    x = np.array([0.5, 3.0, 40.0, 400.0])
    got = oscillatory_panels(lambda u: np.ones_like(u), [(0.0, 1.0)],
                             phase=lambda u, X: X[:, :1] * u,
                             freq_bound=lambda X, lo, hi: np.abs(X[:, 0]),
                             points=x[:, None])
    want = (np.exp(2j * math.pi * x) - 1) / (2j * math.pi * x)
    assert_allclose(got, want, rtol=1e-11, atol=1e-13)
