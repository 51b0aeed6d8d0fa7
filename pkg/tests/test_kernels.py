"""Compiled and pure-Python kernels must agree to rounding."""

import math

import numpy as np
import pytest

from gtcorr import _pykernels

Z_VALUES = [0.0, 1e-8, 0.25, 1.0, 3.75, 10.0, 14.999, 15.0, 15.001, 40.0, 700.0, 1e5]
RICE_CASES = [(0.0, 1.0), (0.5, 1.0), (3.0, 2.78), (10.0, 1.0), (100.0, 1.0), (4.65, 3.29)]


@pytest.mark.parametrize("z", Z_VALUES)
def test_bessel_parity(compiled, z):
    assert compiled.i0e(z) == pytest.approx(_pykernels.i0e(z), rel=1e-15)
    assert compiled.i1e(z) == pytest.approx(_pykernels.i1e(z), rel=1e-15, abs=1e-300)


@pytest.mark.parametrize("v,sigma", RICE_CASES)
def test_rice_parity(compiled, v, sigma):
    for x in np.linspace(0, v + 6 * sigma, 13):
        assert compiled.rice_pdf(x, v, sigma) == pytest.approx(_pykernels.rice_pdf(x, v, sigma), rel=1e-14, abs=1e-300)
        assert compiled.rice_cdf(x, v, sigma) == pytest.approx(_pykernels.rice_cdf(x, v, sigma), abs=1e-14)
    assert compiled.rice_mean_quad(v, sigma) == pytest.approx(_pykernels.rice_mean_quad(v, sigma), rel=1e-14)
    for q in (0.05, 0.5, 0.95):
        assert compiled.rice_quantile(v, sigma, q) == pytest.approx(_pykernels.rice_quantile(v, sigma, q), rel=1e-13)


def test_vector_quantiles_parity(compiled):
    qs = np.linspace(0.01, 0.99, 57)
    a = np.empty_like(qs)
    b = np.empty_like(qs)
    compiled.rice_quantiles_into(2.0, 1.5, qs, a)
    _pykernels.rice_quantiles_into(2.0, 1.5, qs, b)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_vector_matches_scalar_bisection(kern):
    qs = np.array([0.001, 0.1, 0.25, 0.5, 0.5, 0.9, 0.999])
    out = np.empty_like(qs)
    kern.rice_quantiles_into(3.0, 2.0, qs, out)
    for q, x in zip(qs, out):
        assert x == pytest.approx(kern.rice_quantile(3.0, 2.0, q), rel=1e-11)
        assert kern.rice_cdf(x, 3.0, 2.0) == pytest.approx(q, abs=1e-12)


def test_support_covers_mass(kern):
    for v, sigma in RICE_CASES:
        lo, hi = kern.support(v, sigma)
        assert kern.rice_integral(lo, hi, v, sigma) == pytest.approx(1.0, abs=1e-13)


def test_integral_is_additive(kern):
    whole = kern.rice_integral(0.0, 7.0, 4.0, 1.3)
    parts = kern.rice_integral(0.0, 2.2, 4.0, 1.3) + kern.rice_integral(2.2, 7.0, 4.0, 1.3)
    assert whole == pytest.approx(parts, abs=1e-15)
    assert math.isclose(kern.rice_integral(3.0, 3.0, 4.0, 1.3), 0.0)
