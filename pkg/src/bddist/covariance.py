"""Cross-point residual covariance of the effect estimates along the grid.

The covariance between estimates at two boundary points is the two-sided sum
of sandwich forms: each side contributes
(nh^2)^{-1} e1' Psi(x1)^{-1} Upsilon(x1, x2) Psi(x2)^{-1} e1, where Upsilon
pairs kernel-weighted basis residual products of observations weighted at
both points.  Equivalently, each side's contribution is the empirical
covariance of per-observation influence values, which is how the full grid
surface is assembled in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVarianceError, InvalidInputError, InvalidPairingError
from .geometry import EvalGrid
from .locpoly import PointFit, scaled_basis


def _check_pairing(fit_a: PointFit, fit_b: PointFit, require_same_h: bool = True):
    if len(fit_a.column) != len(fit_b.column):
        raise InvalidPairingError("point fits built from different sample sizes")
    if fit_a.p != fit_b.p or fit_a.kernel != fit_b.kernel:
        raise InvalidPairingError("point fits use different order or kernel")
    if require_same_h and fit_a.h != fit_b.h:
        raise InvalidPairingError(
            f"point fits use different bandwidths ({fit_a.h} vs {fit_b.h})"
        )


def upsilon(fit_a: PointFit, fit_b: PointFit, side: int) -> np.ndarray:
    """Residual product moment matrix between two evaluation points, one side.

    Entry (j, k) is h^2 n^{-1} sum_i (D_i(x1)/h)^j (D_i(x2)/h)^k K_h(D_i(x1))
    K_h(D_i(x2)) e_i(x1) e_i(x2) over observations on the given side at both
    points, with e_i the side fit residuals.  The side indicator is applied
    at both evaluation points; for boundary points the two coincide.
    """
    _check_pairing(fit_a, fit_b)
    h = fit_a.h
    n = len(fit_a.column)
    sa, sb = fit_a.side(side), fit_b.side(side)
    both = (sa.weights > 0.0) & (sb.weights > 0.0)
    idx = np.flatnonzero(both)
    p = fit_a.p
    if idx.size == 0:
        return np.zeros((p + 1, p + 1))
    Ba = scaled_basis(fit_a.column.values[idx] / h, p)
    Bb = scaled_basis(fit_b.column.values[idx] / h, p)
    wa = sa.weights[idx] * sa.residuals[idx]
    wb = sb.weights[idx] * sb.residuals[idx]
    return h * h * (Ba * wa[:, None]).T @ (Bb * wb[:, None]) / n


def xi_pair(fit_a: PointFit, fit_b: PointFit) -> float:
    """Covariance estimate between theta_hat at two points: both sides summed."""
    _check_pairing(fit_a, fit_b)
    n = len(fit_a.column)
    h = fit_a.h
    total = 0.0
    for side in (0, 1):
        ups = upsilon(fit_a, fit_b, side)
        va = fit_a.side(side).gram.inv_e1()
        vb = fit_b.side(side).gram.inv_e1()
        total += float(va @ ups @ vb) / (n * h * h)
    return total


def influence_values(fit: PointFit, side: int) -> np.ndarray:
    """Per-observation influence values phi_i of the side intercept estimate.

    phi_i = e1' Psi^{-1} r_p(D_i/h) K_h(D_i) e_i on the side, zero elsewhere;
    the side covariance between two points is n^{-2} sum_i phi_i(x1) phi_i(x2),
    which matches the sandwich form exactly (the h^2 factors cancel).
    """
    sf = fit.side(side)
    idx = np.flatnonzero(sf.weights > 0.0)
    phi = np.zeros(len(fit.column))
    if idx.size:
        B = scaled_basis(fit.column.values[idx] / fit.h, fit.p)
        phi[idx] = (B @ sf.gram.inv_e1()) * sf.weights[idx] * sf.residuals[idx]
    return phi


@dataclass(frozen=True)
class CovarianceSurface:
    """Grid-by-grid covariance matrix and its regularized correlation.

    ``factor`` satisfies corr = factor @ factor.T and is reused as the
    square-root in the Gaussian band simulation.  ``grid`` is the evaluation
    grid when the caller supplied one (needed for boundary-length warnings),
    otherwise None.
    """

    grid: EvalGrid | None
    xi: np.ndarray
    corr: np.ndarray
    factor: np.ndarray
    regularization_applied: bool
    eig_floor: float


def regularize_correlation(corr: np.ndarray, eig_floor: float = 1e-10):
    """Clip eigenvalues at eig_floor and renormalize the diagonal to one.

    Returns (corr, factor, applied): the regularized matrix, a square-root
    factor from the same eigendecomposition, and whether clipping changed
    anything.
    """
    corr = 0.5 * (corr + corr.T)
    eigval, eigvec = np.linalg.eigh(corr)
    applied = bool(np.any(eigval < eig_floor))
    clipped = np.maximum(eigval, eig_floor)
    root = eigvec * np.sqrt(clipped)[None, :]
    reg = root @ root.T
    d = 1.0 / np.sqrt(np.diag(reg))
    reg = reg * d[:, None] * d[None, :]
    np.fill_diagonal(reg, 1.0)
    factor = root * d[:, None]
    return reg, factor, applied


def build_surface(fits: list, n: int, eig_floor: float = 1e-10,
                  grid: EvalGrid | None = None) -> CovarianceSurface:
    """Assemble the covariance surface over all grid fits and fill xi_hat.

    All fits must have succeeded.  With a shared bandwidth the entries equal
    xi_pair exactly; with per-point bandwidths the influence-value form is
    the natural generalization and is used throughout.
    """
    if not fits:
        raise InvalidInputError("no fits supplied")
    if any(not isinstance(f, PointFit) for f in fits):
        raise InvalidInputError("build_surface requires successful fits only")
    M = len(fits)
    xi = np.zeros((M, M))
    for side in (0, 1):
        phi = np.stack([influence_values(f, side) for f in fits])
        xi += phi @ phi.T / (n * n)
    xi = 0.5 * (xi + xi.T)
    diag = np.diag(xi)
    if np.any(diag <= 0.0):
        bad = int(np.argmin(diag))
        raise DegenerateVarianceError(
            f"variance at grid point {bad} is {diag[bad]:.3e}; "
            "needs a nonzero residual with positive weight"
        )
    corr = xi / np.sqrt(diag[:, None] * diag[None, :])
    corr, factor, applied = regularize_correlation(corr, eig_floor)
    for k, f in enumerate(fits):
        f.xi_hat = float(xi[k, k])
    return CovarianceSurface(grid, xi, corr, factor, applied, eig_floor)
