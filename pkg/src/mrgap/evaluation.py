"""Geometric RMSE between point sets, with analytic-manifold oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .neighborhood import dists_to_set
from .point_cloud import PointCloud

__all__ = [
    "GrmseReport",
    "AnalyticManifold",
    "circle",
    "sphere",
    "torus",
    "plane",
    "grmse",
    "grmse_analytic",
    "sandwich_gap_check",
]


@dataclass(frozen=True)
class GrmseReport:
    value: float
    n: int
    m: int  # reference size; 0 for analytic references
    per_point_distances: np.ndarray | None = None


def grmse(
    eval_set: PointCloud,
    reference: PointCloud,
    keep_distances: bool = False,
) -> GrmseReport:
    """Root mean square of exact nearest-neighbor distances to the reference."""
    if eval_set.n == 0 or reference.n == 0:
        raise ValueError("both point sets must be nonempty")
    if eval_set.ambient_dim != reference.ambient_dim:
        raise ValueError("ambient dimensions differ")
    d = dists_to_set(eval_set.points, reference)
    return GrmseReport(
        value=float(np.sqrt(np.mean(d ** 2))),
        n=eval_set.n,
        m=reference.n,
        per_point_distances=d if keep_distances else None,
    )


@dataclass(frozen=True)
class AnalyticManifold:
    """Closed-form distance oracle for a handful of simple shapes."""

    kind: str
    params: tuple[float, ...]

    def distances(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "circle":
            (r,) = self.params
            ring = np.hypot(pts[:, 0], pts[:, 1]) - r
            rest = np.sum(pts[:, 2:] ** 2, axis=1)
            return np.sqrt(ring ** 2 + rest)
        if self.kind == "sphere":
            (r,) = self.params
            return np.abs(np.linalg.norm(pts, axis=1) - r)
        if self.kind == "torus":
            R, r = self.params
            spine = np.sqrt(
                (np.hypot(pts[:, 0], pts[:, 1]) - R) ** 2 + pts[:, 2] ** 2
            )
            return np.abs(spine - r)
        if self.kind == "plane":
            (d,) = self.params
            return np.linalg.norm(pts[:, int(d) :], axis=1)
        raise ValueError(f"unsupported shape: {self.kind}")


def circle(r: float) -> AnalyticManifold:
    """Circle of radius r in the span of the first two coordinates."""
    if r <= 0:
        raise ValueError("radius must be positive")
    return AnalyticManifold("circle", (r,))


def sphere(r: float) -> AnalyticManifold:
    if r <= 0:
        raise ValueError("radius must be positive")
    return AnalyticManifold("sphere", (r,))


def torus(R: float, r: float) -> AnalyticManifold:
    if R <= 0 or r <= 0 or r >= R:
        raise ValueError("need 0 < r < R")
    return AnalyticManifold("torus", (R, r))


def plane(d: int) -> AnalyticManifold:
    """Coordinate plane spanned by the first d axes."""
    if d < 1:
        raise ValueError("plane dimension must be >= 1")
    return AnalyticManifold("plane", (float(d),))


def grmse_analytic(
    eval_set: PointCloud,
    manifold: AnalyticManifold,
    keep_distances: bool = False,
) -> GrmseReport:
    if eval_set.n == 0:
        raise ValueError("evaluation set is empty")
    d = manifold.distances(eval_set.points)
    return GrmseReport(
        value=float(np.sqrt(np.mean(d ** 2))),
        n=eval_set.n,
        m=0,
        per_point_distances=d if keep_distances else None,
    )


def sandwich_gap_check(
    eval_set: PointCloud,
    reference_on_manifold: PointCloud,
    analytic_manifold: AnalyticManifold,
    r: float,
) -> tuple[bool, dict]:
    """Sandwich inequality between sample-based and analytic GRMSE.

    Checks GRMSE(Y, M) <= GRMSE(Y, ref) and
    GRMSE(Y, ref)^2 - 2 r GRMSE(Y, M) - r^2 <= GRMSE(Y, M)^2 for a
    caller-supplied empirical covering radius r of the reference sample.
    """
    if r <= 0:
        raise ValueError("covering radius must be positive")
    ref_d = analytic_manifold.distances(reference_on_manifold.points)
    if np.max(ref_d) > 1e-8:
        raise ValueError(
            f"reference is not on the manifold (max deviation {np.max(ref_d):g})"
        )
    g_m = grmse_analytic(eval_set, analytic_manifold).value
    g_ref = grmse(eval_set, reference_on_manifold).value
    upper_ok = g_m <= g_ref + 1e-12
    lower_ok = g_ref ** 2 - 2.0 * r * g_m - r ** 2 <= g_m ** 2 + 1e-12
    diag = {
        "grmse_manifold": g_m,
        "grmse_reference": g_ref,
        "covering_radius": r,
        "upper_ok": upper_ok,
        "lower_ok": lower_ok,
    }
    return bool(upper_ok and lower_ok), diag
