"""Linear and weighted least-squares quadric estimation.

The estimate minimizes sum(w_i^2 * (d(x_i) @ q)^2) subject to ||q|| == 1,
i.e. the weights scale the design rows and therefore enter the normal
matrix squared.  The solution is the eigenvector of the smallest eigenvalue
of the 10x10 normal matrix.

Points are conditioned before the solve: centered on their mean and scaled
isotropically so the root-mean-square radius is sqrt(3).  This keeps the
normal matrix well conditioned for point clouds far from the origin; the
fitted quadric is mapped back to the original frame afterwards.
"""

from __future__ import annotations

import numpy as np

from .distances import MetricKind, cas, evaluate_metric
from .errors import InsufficientSupport, RankDeficient, TooFewPoints
from .quadric import (EllipsoidModel, as_points, coeffs_to_matrix, design_matrix,
                      matrix_to_coeffs, normalize_coeffs)

# Minimum number of points (and of usably weighted points) for a quadric.
MIN_POINTS = 9

# Weights at or below this are treated as no support at all.
SUPPORT_TOL = 1e-6

# Relative eigengap below which the smallest eigenvector is not isolated.
EIGENGAP_TOL = 1e-10


def _condition(pts: np.ndarray):
    center = pts.mean(axis=0)
    shifted = pts - center
    scale = np.sqrt(np.square(shifted).sum(axis=1).mean() / 3.0)
    if not scale > 1e-12 * (1.0 + float(np.abs(center).max())):
        raise RankDeficient("point cloud has no spatial extent")
    return shifted / scale, center, scale


def _decondition(q_local: np.ndarray, center: np.ndarray, scale: float) -> np.ndarray:
    # x_local = (x - center) / scale, as a homogeneous map S; the original-
    # frame quadric matrix is S^T Q_local S.
    s_mat = np.zeros((4, 4))
    s_mat[:3, :3] = np.eye(3) / scale
    s_mat[:3, 3] = -center / scale
    s_mat[3, 3] = 1.0
    mat = s_mat.T @ coeffs_to_matrix(q_local) @ s_mat
    return normalize_coeffs(matrix_to_coeffs(0.5 * (mat + mat.T)))


def wls_fit(points, weights=None) -> np.ndarray:
    """Weighted algebraic quadric fit; returns normalized coefficients.

    ``weights`` may be None (uniform).  Raises InsufficientSupport when
    fewer than MIN_POINTS weights exceed SUPPORT_TOL and RankDeficient when
    the smallest eigenvector of the normal matrix is not isolated.
    """
    pts = as_points(points)
    if len(pts) < MIN_POINTS:
        raise TooFewPoints(f"need at least {MIN_POINTS} points, got {len(pts)}")
    if weights is None:
        w = np.ones(len(pts))
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape != (len(pts),):
            raise ValueError("weights must match the number of points")
        if not np.isfinite(w).all() or (w < 0.0).any():
            raise ValueError("weights must be finite and non-negative")
    if int((w > SUPPORT_TOL).sum()) < MIN_POINTS:
        raise InsufficientSupport(
            f"fewer than {MIN_POINTS} points carry weight above {SUPPORT_TOL}")

    local, center, scale = _condition(pts)
    rows = w[:, None] * design_matrix(local)
    normal = rows.T @ rows
    evals, evecs = np.linalg.eigh(normal)
    gap = float(evals[1] - evals[0])
    if gap <= EIGENGAP_TOL * max(float(evals[-1]), 1e-300):
        raise RankDeficient("smallest eigenvector of the normal matrix is not isolated")
    return _decondition(evecs[:, 0], center, scale)


def lls_fit(points) -> np.ndarray:
    """Unweighted algebraic quadric fit; returns normalized coefficients."""
    return wls_fit(points, None)


def gaussian_weights(points, model: EllipsoidModel, eps_lo: float,
                     metric: MetricKind | None = None) -> np.ndarray:
    """Per-point weights exp(-d^2 / (2 * eps_lo^2)) under ``metric``.

    Infinite distances produce weight exactly zero.
    """
    if not eps_lo > 0.0:
        raise ValueError("eps_lo must be positive")
    if metric is None:
        metric = cas()
    d = np.atleast_1d(evaluate_metric(metric, points, model))
    with np.errstate(over="ignore"):
        return np.exp(-np.square(d) / (2.0 * eps_lo * eps_lo))


def cas_weights(points, model: EllipsoidModel, eps_lo: float, lam: float = 0.5) -> np.ndarray:
    """Gaussian weights under the combined axial / Sampson metric."""
    return gaussian_weights(points, model, eps_lo, cas(lam))
