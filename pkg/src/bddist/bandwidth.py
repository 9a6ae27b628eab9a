"""Bandwidth selection rules and the univariate-rescaling comparison.

Four rules are provided: a fixed user bandwidth, a rule-of-thumb
h = c0 * C_hat * n^{-1/4} with C_hat the sample standard deviation of each
observation's distance to the boundary, a pilot rule minimizing an estimated
MSE over a candidate grid, and a kink-adaptive rule that caps the pilot
bandwidth at the distance to the nearest kink, floored at the rule of thumb.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import xi_pair
from .errors import (
    BandwidthSelectionError,
    BddistError,
    InvalidBandwidthError,
    InvalidInputError,
)
from .geometry import BoundaryPolyline, as_point, metric_function
from .kernels import build_distance_column
from .locpoly import fit_point


def data_diameter(points) -> float:
    """Largest pairwise distance in a point cloud (via the convex hull)."""
    P = np.asarray(points, dtype=float)
    if len(P) < 2:
        raise InvalidInputError("need at least 2 points for a diameter")
    try:
        from scipy.spatial import ConvexHull, QhullError

        hull = P[ConvexHull(P).vertices]
    except QhullError:
        # Degenerate (collinear) clouds: bounding-box diagonal is exact.
        span = P.max(axis=0) - P.min(axis=0)
        return float(np.hypot(*span))
    diff = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=2).max()))


def rot_scale(sample, polyline: BoundaryPolyline) -> float:
    """Scale constant C_hat: sample SD of distance-to-boundary (ddof = 1)."""
    d = polyline.distance_to(sample.x)
    c = float(np.std(d, ddof=1))
    if not np.isfinite(c) or c <= 0.0:
        raise InvalidInputError("degenerate distance scale: all observations equidistant")
    return c


def rot_bandwidth_from_scale(scale: float, c0: float, n: int, exponent: float = 0.25) -> float:
    """Pure rule-of-thumb formula h = c0 * scale * n^{-exponent}."""
    if n < 2:
        raise InvalidInputError(f"need n >= 2, got {n}")
    if scale <= 0.0 or c0 <= 0.0:
        raise InvalidInputError("scale and c0 must be positive")
    return c0 * scale * float(n) ** (-exponent)


def rot_bandwidth(sample, polyline: BoundaryPolyline, c0: float = 1.0,
                  exponent: float = 0.25, n: int | None = None) -> float:
    """Rule-of-thumb bandwidth targeting the n^{-1/4} rate (one h for all points).

    The exponent override (default 1/4) also serves the undersmoothed
    n^{-1/3} choice used for inference-oriented bandwidths.
    """
    if n is None:
        n = len(sample)
    return rot_bandwidth_from_scale(rot_scale(sample, polyline), c0, n, exponent)


def candidate_bandwidths(sample, eval_pt, rule, num: int = 15,
                         metric: str = "euclidean") -> np.ndarray:
    """Log-spaced candidate grid between the 5th percentile of nonzero |D|
    and half the data diameter."""
    if num < 5:
        raise InvalidInputError(f"candidate grid needs >= 5 points, got {num}")
    column = build_distance_column(sample, eval_pt, rule, metric)
    mags = np.abs(column.values)
    mags = mags[mags > 0.0]
    if mags.size == 0:
        raise InvalidInputError("all observations coincide with the evaluation point")
    lo = float(np.percentile(mags, 5.0))
    hi = 0.5 * data_diameter(sample.x)
    if not lo < hi:
        raise InvalidInputError(f"empty candidate range [{lo}, {hi}]")
    return np.geomspace(lo, hi, num)


def mse_pilot_objective(sample, eval_pt, rule, kernel: str, p: int, h: float,
                        metric: str = "euclidean") -> float:
    """Estimated MSE at bandwidth h: squared order-(p+1) vs order-p fit gap
    plus the variance estimate of the order-p fit."""
    fit_p = fit_point(sample, eval_pt, rule, kernel, h, p, metric)
    fit_p1 = fit_point(sample, eval_pt, rule, kernel, h, p + 1, metric,
                       column=fit_p.column)
    bias_proxy = fit_p.theta_hat - fit_p1.theta_hat
    variance = xi_pair(fit_p, fit_p)
    return bias_proxy * bias_proxy + variance


def mse_pilot_bandwidth(sample, eval_pt, rule, kernel: str, p: int,
                        candidates=None, metric: str = "euclidean") -> float:
    """Candidate bandwidth minimizing the estimated MSE at one point.

    Candidates whose fits fail (too few observations, singular design) are
    skipped; if every candidate fails the selection fails.
    """
    if candidates is None:
        candidates = candidate_bandwidths(sample, eval_pt, rule, metric=metric)
    candidates = np.asarray(candidates, dtype=float)
    if candidates.size < 5:
        raise InvalidInputError("candidate grid needs >= 5 points")
    best_h, best_val = None, np.inf
    for h in candidates:
        try:
            val = mse_pilot_objective(sample, eval_pt, rule, kernel, p, float(h), metric)
        except BddistError:
            continue
        if val < best_val:
            best_h, best_val = float(h), val
    if best_h is None:
        raise BandwidthSelectionError(
            f"no candidate bandwidth in [{candidates.min():.3g}, "
            f"{candidates.max():.3g}] produced a valid fit at {tuple(as_point(eval_pt))}"
        )
    return best_h


def kink_adaptive_bandwidth(eval_pt, polyline: BoundaryPolyline, h_mse: float,
                            rot_h: float, metric: str = "euclidean") -> float:
    """min(h_mse, max(rot_h, distance to the nearest kink)).

    With no marked kinks the pilot bandwidth is returned unchanged.
    """
    if h_mse <= 0.0 or rot_h <= 0.0:
        raise InvalidInputError("bandwidths must be positive")
    kinks = polyline.kink_points
    if len(kinks) == 0:
        return float(h_mse)
    q = as_point(eval_pt)
    d = float(np.min(metric_function(metric)(kinks, q)))
    return float(min(h_mse, max(rot_h, d)))


def univariate_rescale(h_1d: float, p: int, n: int) -> float:
    """Correct a univariate-score bandwidth for the bivariate variance rate.

    The univariate MSE rate n^{-1/(3+2p)} undershoots the correct
    n^{-1/(4+2p)}; the fix multiplies by n^{1/((3+2p)(4+2p))}.
    """
    if h_1d <= 0.0:
        raise InvalidInputError(f"h_1d must be positive, got {h_1d}")
    if n < 1 or p < 0:
        raise InvalidInputError("need n >= 1 and p >= 0")
    return h_1d * float(n) ** (1.0 / ((3 + 2 * p) * (4 + 2 * p)))


# ---------------------------------------------------------------------------
# Rule variants and per-grid resolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fixed:
    h: float


@dataclass(frozen=True)
class RuleOfThumb:
    c0: float = 1.0
    exponent: float = 0.25


@dataclass(frozen=True)
class MsePilot:
    num_candidates: int = 15


@dataclass(frozen=True)
class KinkAdaptive:
    c0: float = 1.0
    exponent: float = 0.25
    num_candidates: int = 15


BandwidthRule = Fixed | RuleOfThumb | MsePilot | KinkAdaptive


def resolve_bandwidths(rule, sample, polyline: BoundaryPolyline, assignment,
                       grid, kernel: str, p: int,
                       metric: str = "euclidean") -> np.ndarray:
    """Per-evaluation-point bandwidths under the given rule.

    Resolved values must be positive and no larger than the data diameter.
    """
    M = grid.count
    diameter = data_diameter(sample.x)
    if isinstance(rule, Fixed):
        hs = np.full(M, float(rule.h))
    elif isinstance(rule, RuleOfThumb):
        hs = np.full(M, rot_bandwidth(sample, polyline, rule.c0, rule.exponent))
    elif isinstance(rule, MsePilot):
        hs = np.array([
            mse_pilot_bandwidth(
                sample, pt, assignment, kernel, p,
                candidates=candidate_bandwidths(
                    sample, pt, assignment, rule.num_candidates, metric
                ),
                metric=metric,
            )
            for pt in grid.points
        ])
    elif isinstance(rule, KinkAdaptive):
        rot_h = rot_bandwidth(sample, polyline, rule.c0, rule.exponent)
        hs = np.empty(M)
        for k, pt in enumerate(grid.points):
            h_mse = mse_pilot_bandwidth(
                sample, pt, assignment, kernel, p,
                candidates=candidate_bandwidths(
                    sample, pt, assignment, rule.num_candidates, metric
                ),
                metric=metric,
            )
            hs[k] = kink_adaptive_bandwidth(pt, polyline, h_mse, rot_h, metric)
    else:
        raise InvalidInputError(f"unknown bandwidth rule: {rule!r}")
    if np.any(hs <= 0.0) or np.any(hs > diameter):
        raise InvalidBandwidthError(
            f"resolved bandwidths must lie in (0, data diameter = {diameter:.6g}]"
        )
    return hs
