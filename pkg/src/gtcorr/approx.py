"""Map-error impact on error statistics and its two-constant approximation.

The impact of a map offset of norm ``v`` on a statistic is the Rice
statistic minus the Rayleigh one, ``Delta(v, sigma)``. It scales as
``sigma * Delta(v / sigma, 1)`` and is approximated by::

    delta(v, 1) = (v**beta + alpha**beta)**(1 / beta) - alpha

with per-metric constants ``alpha > 0`` and ``beta > 1``.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import optimize

from gtcorr import dist

logger = logging.getLogger(__name__)

DEFAULT_GRID_STEP = 0.01
DEFAULT_GRID_MAX = 10.0


@dataclass(frozen=True)
class MetricKind:
    """A summary statistic of the error norm: the mean or a quantile.

    ``q is None`` means the mean. The median and 95%-tail are plain
    quantiles, so ``MetricKind.MEDIAN == MetricKind.quantile(0.5)``.
    """

    q: Optional[float] = None

    def __post_init__(self):
        if self.q is not None:
            q = float(self.q)
            if not 0.0 < q < 1.0:
                raise ValueError(f"quantile level must lie in (0, 1), got {self.q!r}")
            object.__setattr__(self, "q", q)

    @classmethod
    def quantile(cls, q: float) -> "MetricKind":
        return cls(q)

    @property
    def is_mean(self) -> bool:
        return self.q is None

    @property
    def name(self) -> str:
        if self.q is None:
            return "mean"
        if self.q == 0.5:
            return "median"
        if self.q == 0.95:
            return "tail95"
        return f"p{100.0 * self.q:g}"

    @property
    def gamma(self) -> float:
        """The metric's value for Rayleigh(1)."""
        if self.q is None:
            return dist.SQRT_HALF_PI
        return math.sqrt(-2.0 * math.log1p(-self.q))

    @classmethod
    def parse(cls, text: str) -> "MetricKind":
        """Parse ``mean``, ``median``, ``tail``/``tail95`` or ``pNN`` (e.g. ``p95``, ``p2.5``)."""
        t = text.strip().lower()
        if t == "mean":
            return cls.MEAN
        if t == "median":
            return cls.MEDIAN
        if t in ("tail", "tail95"):
            return cls.TAIL95
        m = re.fullmatch(r"[pq](\d+(?:\.\d*)?)", t)
        if m:
            return cls(float(m.group(1)) / 100.0)
        raise ValueError(f"unknown metric {text!r}; expected mean, median, tail95 or pNN")

    def __str__(self) -> str:
        return self.name


MetricKind.MEAN = MetricKind()
MetricKind.MEDIAN = MetricKind(0.5)
MetricKind.TAIL95 = MetricKind(0.95)


class NotBuiltIn(LookupError):
    """No published constants for this metric; use :func:`fit_constants`."""


class FitError(RuntimeError):
    """The constant fit failed to converge; ``best`` holds the best point found."""

    def __init__(self, message: str, best: "ApproxConstants"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class ApproxConstants:
    metric: MetricKind
    alpha: float
    beta: float
    gamma: float
    rmse: float = float("nan")

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1, got {self.beta!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")


# alpha, beta, fit RMSE as published for sigma = 1
_PUBLISHED = {
    MetricKind.MEAN: (1.2392, 2.3064, 0.0052),
    MetricKind.MEDIAN: (1.1471, 2.3384, 0.0032),
    MetricKind.TAIL95: (0.7870, 1.9452, 0.0038),
}


def builtin_constants(metric: MetricKind) -> ApproxConstants:
    """Published constants for the mean, median and 95%-tail."""
    try:
        alpha, beta, rmse = _PUBLISHED[metric]
    except KeyError:
        raise NotBuiltIn(
            f"no published constants for metric {metric}; fit them with fit_constants"
        ) from None
    return ApproxConstants(metric, alpha, beta, metric.gamma, rmse)


def rayleigh_stat(sigma: float, metric: MetricKind) -> float:
    return sigma * metric.gamma


def rice_stat(v: float, sigma: float, metric: MetricKind) -> float:
    p = dist.RiceParams(v, sigma)
    if metric.is_mean:
        return dist.rice_mean(p)
    return dist.rice_quantile(p, metric.q)


def delta_exact(v: float, sigma: float, metric: MetricKind) -> float:
    """Rice minus Rayleigh statistic, i.e. the exact impact of an offset ``v``."""
    if v < 0:
        raise ValueError(f"offset norm must be nonnegative, got {v!r}")
    if v == 0:
        return 0.0
    return rice_stat(v, sigma, metric) - rayleigh_stat(sigma, metric)


def _delta_unit(w, alpha, beta):
    # alpha * ((1 + (w/alpha)**beta)**(1/beta) - 1), exact zero at w = 0
    return alpha * np.expm1(np.log1p((w / alpha) ** beta) / beta)


def delta_approx(v: float, sigma: float, c: ApproxConstants) -> float:
    if v < 0:
        raise ValueError(f"offset norm must be nonnegative, got {v!r}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return sigma * float(_delta_unit(v / sigma, c.alpha, c.beta))


def default_grid() -> np.ndarray:
    n = int(round(DEFAULT_GRID_MAX / DEFAULT_GRID_STEP))
    return np.arange(n + 1) * DEFAULT_GRID_STEP


def delta_exact_grid(metric: MetricKind, grid: Iterable[float]) -> np.ndarray:
    """``Delta(v, 1)`` at every grid point; order independent by construction."""
    return np.array([delta_exact(float(v), 1.0, metric) for v in grid])


def _rmse(params, grid, target):
    alpha, beta = params
    if not (alpha > 0 and beta > 1):
        return math.inf
    resid = target - _delta_unit(grid, alpha, beta)
    return float(np.sqrt(np.mean(resid * resid)))


def _compass_polish(params, f, grid, target, *, final_step=1e-4, max_rounds=100000):
    """Coordinate search until no +/- ``final_step`` move improves the RMSE."""
    x = list(params)
    fx = f(x, grid, target)
    step = 1e-2
    rounds = 0
    while True:
        improved = False
        for i in range(2):
            for sign in (1.0, -1.0):
                trial = list(x)
                trial[i] += sign * step
                ft = f(trial, grid, target)
                if ft < fx:
                    x, fx, improved = trial, ft, True
        rounds += 1
        if rounds >= max_rounds:
            return x, fx, False
        if not improved:
            if step <= final_step:
                return x, fx, True
            step = max(step / 10.0, final_step)
    return x, fx, True


def fit_constants(
    metric: MetricKind,
    grid: Optional[Iterable[float]] = None,
    *,
    start: tuple[float, float] = (1.0, 2.0),
    max_iter: int = 20000,
) -> ApproxConstants:
    """Fit ``alpha`` and ``beta`` minimising the RMSE of ``|Delta(v,1) - delta(v,1)|``.

    Nelder-Mead from ``start`` followed by a coordinate polish, so the result
    is a point where no ``+/-1e-4`` change of either constant lowers the RMSE.
    Deterministic for a given metric, grid and start.

    Args:
        metric: Statistic to fit.
        grid: Offsets ``v`` (with ``sigma = 1``); defaults to ``0:0.01:10``.
        start: Initial ``(alpha, beta)``.
        max_iter: Iteration cap for the simplex stage.

    Raises:
        ValueError: Empty grid, negative entries, or fewer than two distinct
            positive offsets (two constants cannot be pinned by one point).
        FitError: No convergence within the caps.
    """
    g = default_grid() if grid is None else np.asarray(list(grid), dtype=float)
    if g.size == 0:
        raise ValueError("fit grid is empty")
    if not np.all(np.isfinite(g)) or np.any(g < 0):
        raise ValueError("fit grid entries must be finite and nonnegative")
    if np.unique(g[g > 0]).size < 2:
        raise ValueError("fit grid needs at least two distinct positive offsets to determine alpha and beta")
    target = delta_exact_grid(metric, g)

    res = optimize.minimize(
        _rmse,
        np.asarray(start, dtype=float),
        args=(g, target),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": max_iter, "maxfev": 4 * max_iter},
    )
    x, fx, ok = _compass_polish(res.x, _rmse, g, target)
    gamma = metric.gamma
    if not ok or not math.isfinite(fx) or x[0] <= 0 or x[1] <= 1:
        best = ApproxConstants(metric, max(x[0], 1e-12), max(x[1], 1.0 + 1e-12), gamma, fx)
        raise FitError(f"constant fit for {metric} did not converge (rmse={fx:.3g})", best)
    logger.debug("fit %s: alpha=%.6f beta=%.6f rmse=%.3g", metric, x[0], x[1], fx)
    return ApproxConstants(metric, float(x[0]), float(x[1]), gamma, float(fx))
