"""One-sided kernel-weighted local polynomial fits at a boundary point.

Each side t in {0, 1} of the signed distance score is fit separately by
weighted least squares in the bandwidth-scaled basis (1, D/h, ..., (D/h)^p);
the treatment effect estimate at the evaluation point is the difference of
the two fitted intercepts.  Sample averages in the normal equations run over
the full sample size n (not side-specific counts) so that the downstream
variance formulas apply verbatim.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientDataError,
    InvalidBandwidthError,
    InvalidInputError,
    SingularGramError,
)
from .geometry import as_point
from .kernels import DistanceColumn, build_distance_column, kh_weight

MIN_GRAM_EIGENVALUE = 1e-10


def scaled_basis(u, p: int) -> np.ndarray:
    """Polynomial basis rows (1, u, ..., u^p) for each entry of u."""
    if p < 0:
        raise InvalidInputError(f"polynomial order must be >= 0, got {p}")
    return np.vander(np.atleast_1d(np.asarray(u, dtype=float)), p + 1, increasing=True)


@dataclass(frozen=True)
class GramMatrix:
    """Kernel-weighted second-moment matrix of the scaled basis on one side.

    Carries its symmetric eigendecomposition so solves and inverses reuse a
    single factorization, and the minimum eigenvalue used by the
    well-posedness check.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self.eigenvectors @ ((self.eigenvectors.T @ rhs) / self.eigenvalues)

    def inv_e1(self) -> np.ndarray:
        """First column of the inverse (the sandwich filter vector)."""
        return self.eigenvectors @ (self.eigenvectors[0, :] / self.eigenvalues)


def _gram_from_design(B: np.ndarray, w: np.ndarray, n: int) -> GramMatrix:
    M = (B * w[:, None]).T @ B / n
    M = 0.5 * (M + M.T)
    eigenvalues, eigenvectors = np.linalg.eigh(M)
    return GramMatrix(M, eigenvalues, eigenvectors)


def gram(column: DistanceColumn, side: int, kernel: str, h: float, p: int) -> GramMatrix:
    """Weighted second-moment matrix; entry (j, k) = E_n[(D/h)^{j+k} K_h(D) 1_side]."""
    mask = column.side_mask(side)
    w = kh_weight(kernel, column.values, h) * mask
    idx = np.flatnonzero(w > 0.0)
    n = len(column)
    if idx.size == 0:
        z = np.zeros((p + 1, p + 1))
        return GramMatrix(z, np.zeros(p + 1), np.eye(p + 1))
    B = scaled_basis(column.values[idx] / h, p)
    return _gram_from_design(B, w[idx], n)


@dataclass(frozen=True)
class SideFit:
    """One-sided weighted least squares fit in the scaled basis.

    ``gamma_hat`` holds coefficients of (1, D/h, ..., (D/h)^p); raw-basis
    coefficients are gamma_hat[j] / h^j.  ``weights`` and ``residuals`` are
    full-length arrays (zero weight off-side) kept for covariance estimation.
    """

    side: int
    gamma_hat: np.ndarray
    n_eff: int
    gram: GramMatrix
    weights: np.ndarray
    residuals: np.ndarray

    @property
    def intercept(self) -> float:
        return float(self.gamma_hat[0])


def fit_side(y, column: DistanceColumn, side: int, kernel: str, h: float, p: int) -> SideFit:
    """Fit one side by kernel-weighted least squares.

    Raises
    ------
    InsufficientDataError
        Fewer than p + 1 observations carry positive weight on this side.
    SingularGramError
        The weighted second-moment matrix has an eigenvalue below 1e-10.
    """
    y = np.asarray(y, dtype=float)
    n = len(column)
    if y.shape != (n,):
        raise InvalidInputError("y must match the distance column in length")
    mask = column.side_mask(side)
    w = kh_weight(kernel, column.values, h) * mask
    idx = np.flatnonzero(w > 0.0)
    if idx.size < p + 1:
        raise InsufficientDataError(side, int(idx.size), p + 1)
    B = scaled_basis(column.values[idx] / h, p)
    g = _gram_from_design(B, w[idx], n)
    if g.min_eigenvalue < MIN_GRAM_EIGENVALUE:
        raise SingularGramError(side, g.min_eigenvalue)
    s = (B * w[idx, None]).T @ y[idx] / n
    gamma = g.solve(s)
    residuals = np.zeros(n)
    residuals[idx] = y[idx] - B @ gamma
    residuals.setflags(write=False)
    w.setflags(write=False)
    return SideFit(side, gamma, int(idx.size), g, w, residuals)


@dataclass
class PointFit:
    """Both one-sided fits at one evaluation point plus the effect estimate.

    ``xi_hat`` (the variance of theta_hat) starts unset and is filled by the
    covariance module.
    """

    eval_pt: np.ndarray
    h: float
    p: int
    kernel: str
    column: DistanceColumn
    fit0: SideFit
    fit1: SideFit
    xi_hat: float | None = field(default=None)

    @property
    def theta_hat(self) -> float:
        return self.fit1.intercept - self.fit0.intercept

    @property
    def se(self) -> float:
        if self.xi_hat is None or self.xi_hat <= 0.0:
            raise InvalidInputError("xi_hat is unset or nonpositive; run the covariance step")
        return float(np.sqrt(self.xi_hat))

    def side(self, t: int) -> SideFit:
        return self.fit1 if t == 1 else self.fit0


def fit_point(sample, eval_pt, rule, kernel: str, h: float, p: int,
              metric: str = "euclidean", column: DistanceColumn | None = None) -> PointFit:
    """Fit both sides at one boundary point and form the effect estimate."""
    if not np.isfinite(h) or h <= 0.0:
        raise InvalidBandwidthError(f"bandwidth must be positive, got {h}")
    if column is None:
        column = build_distance_column(sample, eval_pt, rule, metric)
    elif not np.array_equal(column.eval_pt, as_point(eval_pt)):
        raise InvalidInputError("precomputed column belongs to a different point")
    fit0 = fit_side(sample.y, column, 0, kernel, h, p)
    fit1 = fit_side(sample.y, column, 1, kernel, h, p)
    return PointFit(as_point(eval_pt), float(h), int(p), kernel, column, fit0, fit1)


def worker_count() -> int:
    """Worker cap from the BDD_THREADS environment variable (default 1)."""
    raw = os.environ.get("BDD_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidInputError(f"BDD_THREADS must be an integer, got {raw!r}") from None


def fit_grid(sample, grid, rule, kernel: str, bandwidths, p: int,
             metric: str = "euclidean") -> list:
    """Fit every grid point; returns a list aligned with the grid.

    ``bandwidths`` is a scalar or a per-point array.  Entries of the result
    are PointFit objects, or the raised error for points whose fit failed.
    Fits are independent, so they run on a thread pool when BDD_THREADS > 1.
    """
    hs = np.broadcast_to(np.asarray(bandwidths, dtype=float), (grid.count,))

    def one(k):
        try:
            return fit_point(sample, grid.points[k], rule, kernel, hs[k], p, metric)
        except (InsufficientDataError, SingularGramError, InvalidBandwidthError) as err:
            return err

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(grid.count)))
    return [one(k) for k in range(grid.count)]
