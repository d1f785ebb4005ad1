"""Iterative denoising: per-point GP chart regressions, repeated until the
fitted noise level stabilizes.

Each round rebuilds every chart from the current cloud, fits one shared
(A, rho, sigma) across all charts, and moves each point purely in its
normal subspace toward the chart's predicted graph value at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gp
from .local_geometry import ChartRegression, build_chart_data
from .point_cloud import PointCloud

__all__ = ["DenoiseConfig", "DenoiseTrace", "denoise_round", "denoise"]


@dataclass(frozen=True)
class DenoiseConfig:
    epsilon: float
    delta: float
    intrinsic_dim: int
    sigma_tol: float | None = None  # None: 0.05 * first-round sigma
    max_iter: int = 10
    hyper_init: gp.GpHyperParams | None = None

    def __post_init__(self):
        if self.epsilon <= 0 or self.delta <= 0:
            raise ValueError("epsilon and delta must be positive")
        if self.delta <= self.epsilon:
            raise ValueError("delta must exceed epsilon")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.intrinsic_dim < 1:
            raise ValueError("intrinsic_dim must be >= 1")


@dataclass(frozen=True)
class DenoiseTrace:
    """Everything the interpolation phase needs from the denoising run.

    clouds[0] is the input, clouds[-1] the final denoised output; the
    interpolator consumes clouds[-2] together with hypers[-1].
    """

    clouds: list[PointCloud]
    hypers: list[gp.GpHyperParams]
    sigma_history: list[float]
    predictive_variances: list[float] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.hypers)


def build_all_charts(
    cloud: PointCloud, config: DenoiseConfig
) -> list[ChartRegression]:
    return [
        build_chart_data(
            cloud, k, config.epsilon, config.delta, config.intrinsic_dim
        )
        for k in range(cloud.n)
    ]


def denoise_round(
    cloud: PointCloud,
    config: DenoiseConfig,
    hyper_warm: gp.GpHyperParams | None = None,
) -> tuple[PointCloud, gp.GpHyperParams, np.ndarray]:
    """One denoising pass: returns (new cloud, fitted hyperparameters,
    per-point predictive variance at the chart origin)."""
    charts = build_all_charts(cloud, config)
    hyper = gp.fit_hyperparams(charts, hyper_warm)
    d = config.intrinsic_dim
    origin = np.zeros((1, d))
    new_pts = np.empty_like(cloud.points)
    variances = np.empty(cloud.n)
    for k, chart in enumerate(charts):
        post = gp.predictive(chart.predictors, chart.responses, origin, hyper)
        disp = np.concatenate([np.zeros(d), post.mean[0]])
        new_pts[k] = cloud.points[k] + chart.frame.U @ disp
        variances[k] = post.covariance[0, 0]
    return PointCloud(new_pts), hyper, variances


def denoise(cloud: PointCloud, config: DenoiseConfig) -> DenoiseTrace:
    """Run denoising rounds until |sigma_i - sigma_{i-1}| <= sigma_tol or
    max_iter is reached, recording every intermediate cloud."""
    clouds = [cloud]
    hypers: list[gp.GpHyperParams] = []
    sigma_history: list[float] = []
    variances: list[float] = []
    warm = config.hyper_init
    tol = config.sigma_tol
    for _ in range(config.max_iter):
        new_cloud, hyper, var = denoise_round(clouds[-1], config, warm)
        clouds.append(new_cloud)
        hypers.append(hyper)
        sigma_history.append(hyper.sigma)
        variances = list(var)
        warm = hyper
        if tol is None:
            tol = 0.05 * sigma_history[0]
        if len(sigma_history) >= 2 and abs(
            sigma_history[-1] - sigma_history[-2]
        ) <= tol:
            break
    return DenoiseTrace(
        clouds=clouds,
        hypers=hypers,
        sigma_history=sigma_history,
        predictive_variances=variances,
    )
