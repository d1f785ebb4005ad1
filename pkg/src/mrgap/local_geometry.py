"""Local covariance matrices, eigen-frames, and tangent/normal projections.

The local frame at a sample point turns the global reconstruction problem
into a per-point regression: tangent-projected displacements are the
predictors, normal-projected displacements the responses.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .point_cloud import PointCloud

__all__ = [
    "LocalFrame",
    "ChartRegression",
    "InsufficientNeighborsError",
    "local_covariance",
    "eigen_frame",
    "project_tangent",
    "project_normal",
    "build_chart_data",
]


class InsufficientNeighborsError(ValueError):
    """Raised when a bandwidth ball contains too few points to fit a chart."""


@dataclass(frozen=True)
class LocalFrame:
    """Orthonormal eigenbasis of a local covariance matrix at a base point.

    Columns of U are eigenvectors in descending eigenvalue order; the
    first intrinsic_dim columns span the estimated tangent space, the
    rest the normal space.
    """

    base: np.ndarray
    U: np.ndarray
    eigenvalues: np.ndarray
    intrinsic_dim: int

    @property
    def ambient_dim(self) -> int:
        return self.base.shape[0]


@dataclass(frozen=True)
class ChartRegression:
    """Per-point regression data: tangent predictors and normal responses.

    For each member j, base + U @ concat(w[j], z[j]) recovers the original
    point exactly (orthogonal change of coordinates).
    """

    frame: LocalFrame
    predictors: np.ndarray  # (N_k, d)
    responses: np.ndarray  # (N_k, D - d)
    member_indices: np.ndarray


def local_covariance(cloud: PointCloud, k: int, epsilon: float) -> np.ndarray:
    """Second-moment matrix of displacements within the epsilon-ball at y_k.

    (1/n) sum_i (y_i - y_k)(y_i - y_k)^T over points with
    ||y_i - y_k|| <= epsilon.  The divisor is the full sample size n, not
    the ball occupancy; eigenvectors are unaffected but eigenvalue scales
    feed the dimension estimator.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    pts = cloud.points
    diff = pts - pts[k]
    mask = np.linalg.norm(diff, axis=1) <= epsilon
    sel = diff[mask]
    return (sel.T @ sel) / cloud.n


def eigen_frame(C: np.ndarray, base: np.ndarray, d: int) -> LocalFrame:
    """Full eigendecomposition of a symmetric matrix as a LocalFrame.

    Eigenvalues come out descending and clamped at zero; each eigenvector
    is oriented so its largest-magnitude entry is positive, which makes
    runs deterministic (the underlying decomposition is sign-agnostic).
    """
    C = np.asarray(C, dtype=float)
    base = np.asarray(base, dtype=float)
    D = C.shape[0]
    if C.shape != (D, D) or np.max(np.abs(C - C.T)) > 1e-10:
        raise ValueError("matrix is not symmetric within 1e-10")
    if not 1 <= d < D:
        raise ValueError(f"intrinsic dim must satisfy 1 <= d < {D}, got {d}")
    evals, evecs = np.linalg.eigh(C)
    evals = np.clip(evals[::-1], 0.0, None)
    evecs = evecs[:, ::-1]
    flip = evecs[np.argmax(np.abs(evecs), axis=0), np.arange(D)] < 0
    evecs = np.where(flip, -evecs, evecs)
    return LocalFrame(base=base, U=evecs, eigenvalues=evals, intrinsic_dim=d)


def project_tangent(frame: LocalFrame, y: np.ndarray) -> np.ndarray:
    """Coordinates of y - base along the first d eigenvectors."""
    y = np.asarray(y, dtype=float)
    if y.shape != frame.base.shape:
        raise ValueError("dimension mismatch")
    return frame.U[:, : frame.intrinsic_dim].T @ (y - frame.base)


def project_normal(frame: LocalFrame, y: np.ndarray) -> np.ndarray:
    """Coordinates of y - base along the last D - d eigenvectors."""
    y = np.asarray(y, dtype=float)
    if y.shape != frame.base.shape:
        raise ValueError("dimension mismatch")
    return frame.U[:, frame.intrinsic_dim :].T @ (y - frame.base)


def build_chart_data(
    cloud: PointCloud,
    k: int,
    epsilon: float,
    delta: float,
    d: int,
) -> ChartRegression:
    """Chart regression problem at y_k.

    Frame from the epsilon-ball covariance; predictors/responses from all
    delta-neighbors (y_k itself contributes the pair (0, 0)).  Fails
    loudly if the epsilon-ball holds d or fewer points.
    """
    if delta <= epsilon:
        warnings.warn(
            f"delta ({delta}) should exceed epsilon ({epsilon})", stacklevel=2
        )
    pts = cloud.points
    diff = pts - pts[k]
    dist = np.linalg.norm(diff, axis=1)
    n_eps = int(np.count_nonzero(dist <= epsilon))
    if n_eps <= d:
        raise InsufficientNeighborsError(
            f"point {k}: epsilon-ball holds {n_eps} points, need more than {d}"
        )
    C = local_covariance(cloud, k, epsilon)
    frame = eigen_frame(C, pts[k], d)
    members = np.flatnonzero(dist <= delta)
    local = diff[members] @ frame.U
    return ChartRegression(
        frame=frame,
        predictors=local[:, :d],
        responses=local[:, d:],
        member_indices=members,
    )
