"""Recover the real error statistic from a validation statistic.

Two ground-truth error models are inverted here:

* marking error, zero-mean isotropic Gaussian: validation and real errors are
  both Rayleigh and ``u**2 = real**2 + v**2`` holds for the mean and for every
  quantile, so the correction is a square root;
* map translation by a constant vector of norm ``v``: the validation error is
  Rice and the real statistic is found by bisection on ``sigma`` using the
  two-constant impact approximation from :mod:`gtcorr.approx`.

The two can be chained, map first, then marking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from gtcorr.approx import ApproxConstants, MetricKind, builtin_constants

DEFAULT_EPSILON = 1e-9
DEFAULT_MAX_ITERATIONS = 200


class InfeasibleCorrection(ValueError):
    """The ground-truth error meets or exceeds the validation statistic."""

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.stage = stage


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class CorrectionConfig:
    """Bisection settings for the map correction.

    Attributes:
        epsilon: Stop once the sigma bracket is narrower than this (meters).
        max_iterations: Hard cap on bisection steps.
    """

    epsilon: float = DEFAULT_EPSILON
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be positive, got {self.max_iterations!r}")


@dataclass(frozen=True)
class CorrectionResult:
    """Corrected statistic plus what it was derived from.

    ``real_stat`` is always ``sigma_real * metric.gamma``; ``impact`` is the
    validation statistic minus ``real_stat``. ``bounds`` is the
    ``(lower, upper)`` interval on the impact for marking corrections.
    ``provenance`` maps stage names to the statistic after that stage.
    """

    real_stat: float
    sigma_real: float
    impact: float
    metric: MetricKind
    bounds: Optional[tuple[float, float]] = None
    provenance: dict = field(default_factory=dict)


def _check_inputs(u: float, v: float, stage: str) -> None:
    if not (math.isfinite(u) and u > 0):
        raise ValueError(f"{stage}: validation statistic u must be positive and finite, got {u!r}")
    if not (math.isfinite(v) and v >= 0):
        raise ValueError(f"{stage}: ground-truth error v must be nonnegative and finite, got {v!r}")
    if v >= u:
        raise InfeasibleCorrection(
            f"{stage}: ground-truth error v={v!r} must be smaller than validation statistic u={u!r}",
            stage=stage,
        )


def marking_impact_bounds(u: float, v: float) -> tuple[float, float]:
    """Bounds ``v**2/(2u) < Delta < v**2/(2u - v)`` on the marking impact."""
    _check_inputs(u, v, "marking")
    return v * v / (2.0 * u), v * v / (2.0 * u - v)


def correct_marking(u: float, v: float, metric: MetricKind = MetricKind.MEAN) -> CorrectionResult:
    """Remove marking error: ``real = sqrt(u**2 - v**2)``.

    Valid for the mean and any quantile because every Rayleigh statistic is
    linear in sigma.

    Raises:
        InfeasibleCorrection: if ``v >= u``.
    """
    _check_inputs(u, v, "marking")
    real = u if v == 0 else math.sqrt((u - v) * (u + v))
    return CorrectionResult(
        real_stat=real,
        sigma_real=real / metric.gamma,
        impact=u - real,
        metric=metric,
        bounds=marking_impact_bounds(u, v),
    )


def tail_ratios() -> tuple[float, float]:
    """95%-tail over median and 95%-tail over mean of any Rayleigh error."""
    tail = MetricKind.TAIL95.gamma
    return tail / MetricKind.MEDIAN.gamma, tail / MetricKind.MEAN.gamma


def solve_sigma_f(sigma: float, u: float, v: float, c: ApproxConstants) -> float:
    """``(u/sigma + alpha - gamma)**beta - (v/sigma)**beta - alpha**beta``.

    Decreasing in sigma below ``(u - v) / (gamma - alpha)``; its root is the
    real-error scale.
    """
    return (u / sigma + c.alpha - c.gamma) ** c.beta - (v / sigma) ** c.beta - c.alpha ** c.beta


def correct_map(
    u: float,
    v: float,
    metric: MetricKind = MetricKind.MEAN,
    c: Optional[ApproxConstants] = None,
    cfg: CorrectionConfig = CorrectionConfig(),
) -> CorrectionResult:
    """Remove a map translation of norm ``v`` from the validation statistic ``u``.

    Bisects ``sigma`` on ``((u - v)/gamma, (u - v)/(gamma - alpha))`` until the
    bracket is narrower than ``cfg.epsilon`` and returns ``sigma * gamma``
    for the bracket midpoint.

    Args:
        u: Validation statistic (meters).
        v: Norm of the map offset vector (meters).
        metric: Statistic ``u`` refers to.
        c: Approximation constants; the published ones for ``metric`` if omitted.
        cfg: Bisection settings.

    Raises:
        InfeasibleCorrection: if ``v >= u``.
        NotBuiltIn: if ``c`` is omitted for a metric without published constants.
    """
    _check_inputs(u, v, "map")
    if c is None:
        c = builtin_constants(metric)
    elif c.metric != metric:
        raise ValueError(f"constants are for {c.metric}, not {metric}")
    gamma, alpha = c.gamma, c.alpha
    assert gamma > alpha, f"gamma={gamma} must exceed alpha={alpha} for {metric}"

    if v == 0:
        sigma = u / gamma
    else:
        lo = (u - v) / gamma
        hi = (u - v) / (gamma - alpha)
        # f > 0 at lo and f < 0 at hi analytically; for v << u rounding can
        # flatten f(lo) to zero, meaning the root sits at lo to within ulps
        if solve_sigma_f(lo, u, v, c) <= 0:
            hi = lo
        assert solve_sigma_f(hi, u, v, c) <= 0 or hi == lo, "f(sigma_max) must be negative"
        it = 0
        while hi - lo > cfg.epsilon:
            if it >= cfg.max_iterations:
                raise ConvergenceError(
                    f"map bisection exceeded {cfg.max_iterations} iterations "
                    f"(bracket width {hi - lo:.3g} > epsilon {cfg.epsilon:.3g})"
                )
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break  # bracket at floating-point resolution
            if solve_sigma_f(mid, u, v, c) < 0:
                hi = mid
            else:
                lo = mid
            it += 1
        sigma = 0.5 * (lo + hi)

    real = sigma * gamma
    return CorrectionResult(real_stat=real, sigma_real=sigma, impact=u - real, metric=metric)


def correct_pipeline(
    u: float,
    map_v: float,
    mark_v: float,
    metric: MetricKind = MetricKind.MEAN,
    cfg: CorrectionConfig = CorrectionConfig(),
    c: Optional[ApproxConstants] = None,
) -> CorrectionResult:
    """Remove map error, then marking error, from a validation statistic.

    This is the sequential composition of the two corrections; the joint
    model with both errors present is not derived, so the result is an
    approximation whenever both are nonzero.

    Raises:
        InfeasibleCorrection: with ``stage`` set to ``"map"`` or ``"marking"``.
    """
    after_map = correct_map(u, map_v, metric, c, cfg)
    final = correct_marking(after_map.real_stat, mark_v, metric)
    return CorrectionResult(
        real_stat=final.real_stat,
        sigma_real=final.sigma_real,
        impact=u - final.real_stat,
        metric=metric,
        bounds=final.bounds,
        provenance={
            "validation": u,
            "after_map": after_map.real_stat,
            "after_marking": final.real_stat,
        },
    )
