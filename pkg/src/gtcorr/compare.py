"""Which ground-truth error hurts a statistic more: marking or map offset?

For a validation statistic ``u`` and a ground-truth error of the same size
``v``, write ``v/u = (1 - lam**2) / (1 + lam**2)`` with ``lam`` in (0, 1).
Marking error has the larger impact exactly when ``g(lam) > 0`` where::

    g(lam) = (1 + 2 lam (alpha/gamma - 1) + lam**2)**beta
             - (1 - lam**2)**beta - (2 lam alpha / gamma)**beta

``g`` vanishes at both ends of [0, 1]. For the mean and median it has a
single interior root ``lam*``, giving a threshold on ``v/u``; for the
95%-tail it is negative throughout, so map error always dominates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from gtcorr.approx import ApproxConstants, MetricKind, builtin_constants
from gtcorr.correct import CorrectionConfig, InfeasibleCorrection, correct_map

SCAN_POINTS = 10_000


class Dominant(str, enum.Enum):
    MARKING = "Marking"
    MAP = "Map"


@dataclass(frozen=True)
class DominanceVerdict:
    metric: MetricKind
    ratio_v_over_u: float
    dominant: Dominant
    threshold: Optional[float]
    marking_impact: float
    map_impact: float


def g_lambda(lam, c: ApproxConstants):
    """Evaluate ``g`` at ``lam`` (scalar or array) in [0, 1]."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0) or np.any(lam > 1):
        raise ValueError("lambda must lie in [0, 1]")
    r = c.alpha / c.gamma
    out = (
        (1.0 + 2.0 * lam * (r - 1.0) + lam * lam) ** c.beta
        - (1.0 - lam * lam) ** c.beta
        - (2.0 * lam * r) ** c.beta
    )
    # pin the analytic zeros at the endpoints
    out = np.where((lam == 0.0) | (lam == 1.0), 0.0, out)
    return float(out) if out.ndim == 0 else out


def find_lambda_star(c: ApproxConstants, *, tol: float = 1e-12) -> Optional[float]:
    """Interior root of ``g`` where it turns from negative to positive.

    A uniform scan isolates the sign change (``g`` is zero at both ends, so
    bracketing (0, 1) directly would fail), then bisection refines it until
    ``|g| <= tol``. Returns ``None`` when ``g < 0`` on the whole open interval.
    """
    grid = np.arange(1, SCAN_POINTS) / SCAN_POINTS
    vals = g_lambda(grid, c)
    flips = np.nonzero((vals[:-1] < 0) & (vals[1:] > 0))[0]
    if flips.size == 0:
        return None
    lo, hi = float(grid[flips[0]]), float(grid[flips[0] + 1])
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g_lambda(mid, c)
        if abs(gm) <= tol or mid <= lo or mid >= hi:
            break
        if gm < 0:
            lo = mid
        else:
            hi = mid
    return mid


def impact_threshold(c: ApproxConstants) -> Optional[float]:
    """``v/u`` below which marking error dominates; ``None`` if it never does."""
    lam = find_lambda_star(c)
    if lam is None:
        return None
    return (1.0 - lam * lam) / (1.0 + lam * lam)


def compare_impacts(
    u: float,
    v: float,
    metric: MetricKind = MetricKind.MEAN,
    c: Optional[ApproxConstants] = None,
    cfg: CorrectionConfig = CorrectionConfig(),
) -> DominanceVerdict:
    """Compute both impacts for the same ``v`` and report the larger one."""
    if not (v > 0 and math.isfinite(v)):
        raise ValueError(f"ground-truth error v must be positive, got {v!r}")
    if v >= u:
        raise InfeasibleCorrection(f"compare: v={v!r} must be smaller than u={u!r}", stage="compare")
    if c is None:
        c = builtin_constants(metric)
    mark = u - math.sqrt((u - v) * (u + v))
    mapped = u - correct_map(u, v, metric, c, cfg).real_stat
    return DominanceVerdict(
        metric=metric,
        ratio_v_over_u=v / u,
        dominant=Dominant.MARKING if mark > mapped else Dominant.MAP,
        threshold=impact_threshold(c),
        marking_impact=mark,
        map_impact=mapped,
    )
