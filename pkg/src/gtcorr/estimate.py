"""Error vectors, summary statistics and distribution fits for evaluation data.

A :class:`Dataset` holds the algorithm estimates, the (possibly erroneous)
marked ground truth and, when known, the real ground truth, as ``(n, 2)``
arrays in meters. Every norm-based statistic here treats the data as an
unordered sample.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from gtcorr import dist
from gtcorr.approx import MetricKind

DEFAULT_QUANTILES = (0.25, 0.5, 0.75, 0.95)


class EstimationError(ValueError):
    pass


class Vec2(NamedTuple):
    x: float
    y: float

    @property
    def norm(self) -> float:
        return math.hypot(self.x, self.y)


class ErrorKind(str, enum.Enum):
    VALIDATION = "validation"
    REAL = "real"
    MARKING = "marking"


def _as_points(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise EstimationError(f"{name} must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise EstimationError(f"{name} contains non-finite coordinates")
    return arr


@dataclass(frozen=True)
class Dataset:
    """Evaluation records; ``real`` is present for all records or ``None``."""

    algo: np.ndarray
    marked: np.ndarray
    real: Optional[np.ndarray] = None

    def __post_init__(self):
        algo = _as_points(self.algo, "algo")
        marked = _as_points(self.marked, "marked")
        if algo.shape != marked.shape:
            raise EstimationError("algo and marked must have the same number of records")
        if algo.shape[0] == 0:
            raise EstimationError("dataset has no records")
        object.__setattr__(self, "algo", algo)
        object.__setattr__(self, "marked", marked)
        if self.real is not None:
            real = _as_points(self.real, "real")
            if real.shape != algo.shape:
                raise EstimationError("real must have one entry per record")
            object.__setattr__(self, "real", real)

    def __len__(self) -> int:
        return self.algo.shape[0]

    @property
    def has_real(self) -> bool:
        return self.real is not None


def error_vectors(d: Dataset, kind: ErrorKind) -> np.ndarray:
    """Per-record error vectors, shape ``(n, 2)``.

    Validation is marked - algo, real is real - algo and marking is
    marked - real, so validation = real + marking.
    """
    kind = ErrorKind(kind)
    if kind is ErrorKind.VALIDATION:
        return d.marked - d.algo
    if d.real is None:
        raise EstimationError(f"{kind.value} errors need the real ground truth, which this dataset lacks")
    if kind is ErrorKind.REAL:
        return d.real - d.algo
    return d.marked - d.real


def norms(vectors) -> np.ndarray:
    v = np.asarray(vectors, dtype=float)
    return np.hypot(v[:, 0], v[:, 1])


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    quantiles: dict = field(default_factory=dict)

    def get(self, metric: MetricKind) -> float:
        if metric.is_mean:
            return self.mean
        try:
            return self.quantiles[metric.q]
        except KeyError:
            raise KeyError(f"quantile {metric.q} was not computed") from None

    def to_dict(self) -> dict:
        out = {"n": self.n, "mean": self.mean}
        for q, val in sorted(self.quantiles.items()):
            out[MetricKind(q).name] = val
        return out


def summary_stats(values: Sequence[float], probs: Sequence[float] = DEFAULT_QUANTILES) -> SummaryStats:
    """Mean and quantiles; quantiles interpolate linearly between order
    statistics at one-based rank ``q (n - 1) + 1``."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise EstimationError("cannot summarise an empty sample")
    probs = sorted({float(p) for p in set(probs) | set(DEFAULT_QUANTILES)})
    qv = np.quantile(x, probs, method="linear")
    return SummaryStats(
        n=int(x.size),
        mean=float(np.mean(x)),
        quantiles={p: float(val) for p, val in zip(probs, qv)},
    )


@dataclass(frozen=True)
class NormalParams:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise EstimationError(f"normal sigma must be positive, got {self.sigma!r}")


def fit_normal_per_axis(errors) -> tuple[NormalParams, NormalParams]:
    """Sample mean and (n-1)-divisor standard deviation of each axis."""
    e = _as_points(errors, "errors")
    if e.shape[0] < 2:
        raise EstimationError("need at least two error vectors to fit per-axis normals")
    mu = e.mean(axis=0)
    sd = e.std(axis=0, ddof=1)
    for axis, s in zip("xy", sd):
        if not s > 0:
            raise EstimationError(f"{axis} errors have zero variance; a normal fit needs sigma > 0")
    return NormalParams(float(mu[0]), float(sd[0])), NormalParams(float(mu[1]), float(sd[1]))


def fit_rayleigh(values: Sequence[float]) -> dist.RayleighParams:
    """Maximum-likelihood Rayleigh scale ``sqrt(sum x**2 / (2 n))``."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise EstimationError("cannot fit a Rayleigh distribution to an empty sample")
    if not np.all(x > 0) or not np.all(np.isfinite(x)):
        raise EstimationError("Rayleigh fit needs strictly positive, finite norms")
    return dist.RayleighParams(float(np.sqrt(np.dot(x, x) / (2.0 * x.size))))


def fit_rice(errors) -> dist.RiceParams:
    """Moment fit from 2D error vectors.

    ``v`` is the norm of the sample mean vector and ``sigma`` pools the two
    per-axis sample variances, matching the ``N(V, sigma**2 I)`` model.
    """
    e = _as_points(errors, "errors")
    if e.shape[0] < 2:
        raise EstimationError("need at least two error vectors to fit a Rice distribution")
    mean = e.mean(axis=0)
    var = e.var(axis=0, ddof=1)
    sigma = math.sqrt(0.5 * float(var.sum()))
    if not sigma > 0:
        raise EstimationError("error vectors have zero variance; Rice sigma is undefined")
    return dist.RiceParams(float(math.hypot(mean[0], mean[1])), sigma)


def fit_rice_norms(values: Sequence[float]) -> dist.RiceParams:
    """Moment fit from norms only.

    Matches the first two raw moments: ``E[R**2] = v**2 + 2 sigma**2`` fixes
    sigma given v, and v is found by bisection on the Rice mean. Samples
    whose mean-to-RMS ratio is at or below the Rayleigh value give ``v = 0``.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2:
        raise EstimationError("need at least two norms to fit a Rice distribution")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise EstimationError("norms must be finite and nonnegative")
    m1 = float(np.mean(x))
    m2 = float(np.mean(x * x))
    if not m2 > 0:
        raise EstimationError("all norms are zero")
    rms = math.sqrt(m2)
    if m1 / rms <= math.sqrt(math.pi / 4.0):
        return dist.RiceParams(0.0, math.sqrt(m2 / 2.0))

    def mean_gap(v: float) -> float:
        sigma = math.sqrt(max((m2 - v * v) / 2.0, 1e-300))
        return dist.rice_mean(dist.RiceParams(v, sigma)) - m1

    lo, hi = 0.0, rms
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if mean_gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    v = 0.5 * (lo + hi)
    sigma = math.sqrt((m2 - v * v) / 2.0)
    if not sigma > 0:
        raise EstimationError("norms have zero spread; Rice sigma is undefined")
    return dist.RiceParams(v, sigma)


def plotting_positions(n: int) -> np.ndarray:
    return (np.arange(1, n + 1) - 0.5) / n


def qq_points(values: Sequence[float], theoretical_quantile: Callable) -> np.ndarray:
    """Q-Q pairs ``(Q((i - 0.5)/n), x_(i))`` as an ``(n, 2)`` array.

    ``theoretical_quantile`` is called once with the array of plotting
    positions and must return an array of the same length.
    """
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise EstimationError("cannot build a Q-Q series from an empty sample")
    theory = np.asarray(theoretical_quantile(plotting_positions(x.size)), dtype=float)
    if theory.shape != x.shape:
        raise EstimationError("theoretical quantile function returned the wrong number of values")
    return np.column_stack([theory, x])


def qq_max_deviation(points: np.ndarray, lo: float = 0.01, hi: float = 0.99) -> float:
    """Largest ``|theoretical - empirical|`` over plotting positions in ``[lo, hi]``."""
    pts = np.asarray(points, dtype=float)
    pos = np.arange(1, pts.shape[0] + 1) / pts.shape[0]
    mask = (pos >= lo) & (pos <= hi)
    return float(np.max(np.abs(pts[mask, 0] - pts[mask, 1])))


def ecdf_points(values: Sequence[float]) -> np.ndarray:
    """Empirical CDF steps ``(x_(i), i/n)`` as an ``(n, 2)`` array."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise EstimationError("cannot build an ECDF from an empty sample")
    return np.column_stack([x, np.arange(1, x.size + 1) / x.size])


def rayleigh_quantile_fn(p: dist.RayleighParams) -> Callable:
    return lambda probs: dist.rayleigh_quantiles(p, probs)


def rice_quantile_fn(p: dist.RiceParams) -> Callable:
    return lambda probs: dist.rice_quantiles(p, probs)


def exponential_quantile_fn(mean: float) -> Callable:
    """Quantiles of the exponential distribution with the given mean."""
    if not mean > 0:
        raise EstimationError(f"exponential mean must be positive, got {mean!r}")
    return lambda probs: -mean * np.log1p(-np.asarray(probs, dtype=float))
