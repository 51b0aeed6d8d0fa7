"""Rayleigh and Rice error-norm distributions and the Bessel functions behind them.

Rayleigh statistics are closed form. Rice statistics have no closed form
except for the mean; the CDF is an adaptive Gauss-Kronrod integral of the
density and quantiles are found by bisection on that CDF. Densities always go
through the exponentially scaled ``I0`` so ``x * v / sigma**2`` may be large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gtcorr._backend import kernels

SQRT_HALF_PI = math.sqrt(math.pi / 2.0)


class DomainError(ValueError):
    """Argument outside the domain of a distribution function."""


@dataclass(frozen=True)
class RayleighParams:
    """Rayleigh scale, in meters."""

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"Rayleigh sigma must be positive and finite, got {self.sigma!r}")


@dataclass(frozen=True)
class RiceParams:
    """Rice offset norm ``v`` and per-axis scale ``sigma``, in meters."""

    v: float
    sigma: float

    def __post_init__(self):
        if not (self.v >= 0 and math.isfinite(self.v)):
            raise DomainError(f"Rice v must be nonnegative and finite, got {self.v!r}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"Rice sigma must be positive and finite, got {self.sigma!r}")


def bessel_i0e(z: float) -> float:
    """``I0(z) * exp(-|z|)``; finite for every finite z."""
    return kernels.i0e(float(z))


def bessel_i1e(z: float) -> float:
    """``I1(z) * exp(-|z|)``; finite for every finite z."""
    return kernels.i1e(float(z))


def bessel_i0(z: float) -> float:
    """Modified Bessel function of the first kind, order zero.

    Power series up to ``|z| = 15``, exponentially scaled asymptotic
    expansion above. Returns ``inf`` once the result overflows a double.
    """
    z = abs(float(z))
    scaled = kernels.i0e(z)
    try:
        return scaled * math.exp(z)
    except OverflowError:
        return math.inf


def bessel_i1(z: float) -> float:
    """Modified Bessel function of the first kind, order one (odd in z)."""
    z = float(z)
    scaled = kernels.i1e(z)
    try:
        return scaled * math.exp(abs(z))
    except OverflowError:
        return math.copysign(math.inf, z)


def _check_x(x: float) -> float:
    x = float(x)
    if not x >= 0:
        raise DomainError(f"error norm must be nonnegative, got {x!r}")
    return x


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {q!r}")
    return q


def rayleigh_pdf(x: float, p: RayleighParams) -> float:
    x = _check_x(x)
    s2 = p.sigma * p.sigma
    return x / s2 * math.exp(-0.5 * x * x / s2)


def rayleigh_cdf(x: float, p: RayleighParams) -> float:
    x = _check_x(x)
    return -math.expm1(-0.5 * (x / p.sigma) ** 2)


def rayleigh_mean(p: RayleighParams) -> float:
    return p.sigma * SQRT_HALF_PI


def rayleigh_quantile(p: RayleighParams, q: float) -> float:
    """``sigma * sqrt(-2 ln(1 - q))``, linear in sigma."""
    q = _check_q(q)
    return p.sigma * math.sqrt(-2.0 * math.log1p(-q))


def rice_pdf(x: float, p: RiceParams) -> float:
    return kernels.rice_pdf(_check_x(x), p.v, p.sigma)


def rice_cdf(x: float, p: RiceParams) -> float:
    """CDF by adaptive quadrature of the density (absolute error well below 1e-9)."""
    x = _check_x(x)
    if math.isinf(x):
        return 1.0
    return kernels.rice_cdf(x, p.v, p.sigma)


def rice_mean(p: RiceParams) -> float:
    """Closed-form Rice mean.

    ``sigma*sqrt(pi/2) * exp(-t/2) * [(1+t) I0(t/2) + t I1(t/2)]`` with
    ``t = v**2 / (2 sigma**2)``, evaluated through the scaled Bessel
    functions so the exponentials cancel analytically.
    """
    t = p.v * p.v / (2.0 * p.sigma * p.sigma)
    h = 0.5 * t
    return p.sigma * SQRT_HALF_PI * ((1.0 + t) * kernels.i0e(h) + t * kernels.i1e(h))


def rice_mean_quad(p: RiceParams) -> float:
    """Rice mean by quadrature of ``x * pdf(x)``; independent of :func:`rice_mean`."""
    return kernels.rice_mean_quad(p.v, p.sigma)


def rice_quantile(p: RiceParams, q: float) -> float:
    """Bisection on :func:`rice_cdf` from the bracket ``[0, v + 10 sigma]``."""
    q = _check_q(q)
    return kernels.rice_quantile(p.v, p.sigma, q)


def rice_quantiles(p: RiceParams, qs) -> np.ndarray:
    """Vectorized :func:`rice_quantile` for many probabilities at once."""
    qs = np.asarray(qs, dtype=float)
    flat = qs.ravel()
    if flat.size and not (np.all(flat > 0.0) and np.all(flat < 1.0)):
        raise DomainError("probabilities must lie in (0, 1)")
    order = np.argsort(flat, kind="stable")
    sorted_q = np.ascontiguousarray(flat[order])
    out = np.empty_like(sorted_q)
    kernels.rice_quantiles_into(p.v, p.sigma, sorted_q, out)
    result = np.empty_like(out)
    result[order] = out
    return result.reshape(qs.shape)


def rayleigh_quantiles(p: RayleighParams, qs) -> np.ndarray:
    qs = np.asarray(qs, dtype=float)
    if qs.size and not (np.all(qs > 0.0) and np.all(qs < 1.0)):
        raise DomainError("probabilities must lie in (0, 1)")
    return p.sigma * np.sqrt(-2.0 * np.log1p(-qs))
