"""Pointwise confidence intervals and simulated uniform confidence bands.

Pointwise intervals use the normal quantile.  Uniform bands share one
critical value: the empirical (1 - alpha) quantile of the maximum absolute
coordinate of mean-zero Gaussian draws whose correlation is the regularized
estimate from the covariance surface.  Draws come from a counter-based
generator so results are reproducible regardless of scheduling.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .covariance import CovarianceSurface
from .errors import InvalidInputError, InvalidLevelError
from .locpoly import PointFit

DEFAULT_NUM_DRAWS = 10000

# Warn when the boundary arc inside a kernel support is this many times h.
DEFAULT_PERIMETER_MULTIPLE = 20.0


class BoundaryLengthWarning(UserWarning):
    """Local boundary arc length is large relative to the bandwidth."""


def normal_quantile(alpha: float) -> float:
    """Two-sided standard normal critical value, Phi^{-1}(1 - alpha/2)."""
    if not 0.0 < alpha < 1.0:
        raise InvalidLevelError(f"alpha must be in (0, 1), got {alpha}")
    return float(ndtri(1.0 - alpha / 2.0))


@dataclass(frozen=True)
class IntervalResult:
    """One confidence interval: theta_hat +- quantile * se."""

    eval_pt: np.ndarray
    theta_hat: float
    se: float
    alpha: float
    quantile: float
    lower: float
    upper: float


def _interval(fit: PointFit, alpha: float, q: float) -> IntervalResult:
    se = fit.se
    return IntervalResult(
        eval_pt=fit.eval_pt,
        theta_hat=fit.theta_hat,
        se=se,
        alpha=alpha,
        quantile=q,
        lower=fit.theta_hat - q * se,
        upper=fit.theta_hat + q * se,
    )


def pointwise_ci(fit: PointFit, alpha: float = 0.05) -> IntervalResult:
    """Normal-quantile confidence interval at one evaluation point."""
    return _interval(fit, alpha, normal_quantile(alpha))


def uniform_quantile(corr: np.ndarray, alpha: float, num_draws: int = DEFAULT_NUM_DRAWS,
                     seed: int = 0, factor: np.ndarray | None = None) -> float:
    """Critical value for simultaneous coverage over the grid.

    Simulates ``num_draws`` mean-zero Gaussian vectors with the given unit-
    diagonal correlation and returns the ceil((1 - alpha) num_draws)-th order
    statistic of the per-draw maximum absolute coordinate.  The square-root
    ``factor`` from the regularization eigendecomposition is reused when
    supplied; otherwise the matrix must already be positive semidefinite.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidLevelError(f"alpha must be in (0, 1), got {alpha}")
    if num_draws < 1000:
        raise InvalidInputError(f"num_draws must be >= 1000, got {num_draws}")
    corr = np.asarray(corr, dtype=float)
    M = corr.shape[0]
    if corr.shape != (M, M):
        raise InvalidInputError("correlation matrix must be square")
    if np.max(np.abs(np.diag(corr) - 1.0)) > 1e-8:
        raise InvalidInputError("correlation matrix must have unit diagonal")
    if factor is None:
        eigval, eigvec = np.linalg.eigh(0.5 * (corr + corr.T))
        if eigval[0] < -1e-10:
            raise InvalidInputError(
                f"correlation matrix is not PSD (min eigenvalue {eigval[0]:.3e}); "
                "regularize it first"
            )
        factor = eigvec * np.sqrt(np.maximum(eigval, 0.0))[None, :]
    rng = np.random.Generator(np.random.Philox(seed))
    maxima = np.empty(num_draws)
    block = 65536
    for start in range(0, num_draws, block):
        stop = min(start + block, num_draws)
        z = rng.standard_normal((stop - start, M))
        maxima[start:stop] = np.abs(z @ factor.T).max(axis=1)
    maxima.sort()
    k = math.ceil((1.0 - alpha) * num_draws)
    return float(maxima[k - 1])


@dataclass(frozen=True)
class BandResult:
    """Uniform confidence band: per-point intervals sharing one critical value.

    ``grid`` is the evaluation grid when the covariance surface carried one.
    """

    grid: object
    intervals: list
    quantile: float
    alpha: float
    num_draws: int
    seed: int

    @property
    def lower(self) -> np.ndarray:
        return np.array([iv.lower for iv in self.intervals])

    @property
    def upper(self) -> np.ndarray:
        return np.array([iv.upper for iv in self.intervals])


def uniform_band(fits: list, surface: CovarianceSurface, alpha: float = 0.05,
                 num_draws: int = DEFAULT_NUM_DRAWS, seed: int = 0,
                 perimeter_multiple: float = DEFAULT_PERIMETER_MULTIPLE) -> BandResult:
    """Simultaneous confidence band over all grid fits.

    Emits BoundaryLengthWarning for evaluation points whose local boundary
    arc length inside the kernel support exceeds ``perimeter_multiple`` times
    the bandwidth (the band's validity degrades on very wiggly boundaries).
    """
    if len(fits) != surface.corr.shape[0]:
        raise InvalidInputError("fits and surface have mismatched grid sizes")
    if surface.grid is not None:
        for fit in fits:
            arc = surface.grid.polyline.arclength_within(fit.eval_pt, fit.h)
            if arc > perimeter_multiple * fit.h:
                warnings.warn(
                    f"boundary arc length {arc:.3g} inside the kernel support at "
                    f"{tuple(fit.eval_pt)} exceeds {perimeter_multiple:g} x h",
                    BoundaryLengthWarning,
                    stacklevel=2,
                )
    q = uniform_quantile(surface.corr, alpha, num_draws, seed, factor=surface.factor)
    intervals = [_interval(fit, alpha, q) for fit in fits]
    return BandResult(surface.grid, intervals, q, alpha, num_draws, seed)
