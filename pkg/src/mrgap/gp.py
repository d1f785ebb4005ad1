"""Squared-exponential GP machinery shared by denoising and interpolation.

One (A, rho, sigma) triple is fitted jointly across all local charts by
maximizing the summed log marginal likelihood.  The likelihood is kept in
the un-halved scaling

    -tr(Z^T K^-1 Z) - q log det K - (qN/2) log 2pi,   K = Sigma_1 + sigma^2 I,

whose maximizer coincides with the conventional -1/2 form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from .local_geometry import ChartRegression

__all__ = [
    "GpHyperParams",
    "PredictiveGaussian",
    "FactorizationError",
    "OptimizationError",
    "kernel",
    "gram",
    "predictive",
    "log_marginal",
    "log_marginal_gradient",
    "joint_log_marginal",
    "fit_hyperparams",
]

SIGMA_FLOOR = 1e-9
_LOG_2PI = np.log(2.0 * np.pi)


class FactorizationError(RuntimeError):
    """Gram factorization failed even after jitter escalation."""


class OptimizationError(RuntimeError):
    """Hyperparameter optimization failed from every start."""


@dataclass(frozen=True)
class GpHyperParams:
    """Signal variance A, squared-exponential length parameter rho, noise sigma."""

    A: float
    rho: float
    sigma: float

    def __post_init__(self):
        if self.A <= 0 or self.rho <= 0:
            raise ValueError("A and rho must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class PredictiveGaussian:
    """Posterior over m test points shared across q output dimensions."""

    mean: np.ndarray  # (m, q)
    covariance: np.ndarray  # (m, m)


def kernel(u: np.ndarray, v: np.ndarray, hyper: GpHyperParams) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("dimension mismatch")
    return float(hyper.A * np.exp(-np.sum((u - v) ** 2) / hyper.rho))


def gram(points: np.ndarray, hyper: GpHyperParams) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    sq = cdist(points, points, "sqeuclidean")
    return hyper.A * np.exp(-sq / hyper.rho)


def _cross_gram(a: np.ndarray, b: np.ndarray, hyper: GpHyperParams) -> np.ndarray:
    return hyper.A * np.exp(-cdist(a, b, "sqeuclidean") / hyper.rho)


def _factor(K: np.ndarray, hyper: GpHyperParams):
    """Cholesky of K + sigma^2 I with escalating diagonal jitter.

    Jitter starts at 1e-12 * A and grows tenfold up to 1e-6 * A; duplicate
    predictors make the noise-free Gram exactly singular, so some jitter
    is routinely needed when sigma is tiny.
    """
    N = K.shape[0]
    base = K + hyper.sigma ** 2 * np.eye(N)
    jitter = 0.0
    while True:
        try:
            cf = cho_factor(base + jitter * np.eye(N), lower=True)
            return cf, jitter
        except np.linalg.LinAlgError:
            pass
        if jitter == 0.0:
            jitter = 1e-12 * hyper.A
        elif jitter < 1e-6 * hyper.A:
            jitter *= 10.0
        else:
            raise FactorizationError(
                f"Cholesky failed for {N}x{N} system at max jitter {jitter:g}"
            )


def predictive(
    train_w: np.ndarray,
    train_z: np.ndarray,
    test_u: np.ndarray,
    hyper: GpHyperParams,
) -> PredictiveGaussian:
    """Posterior mean and covariance at test inputs by block conditioning."""
    train_w = np.atleast_2d(np.asarray(train_w, dtype=float))
    train_z = np.atleast_2d(np.asarray(train_z, dtype=float))
    test_u = np.atleast_2d(np.asarray(test_u, dtype=float))
    m = test_u.shape[0]
    s4 = gram(test_u, hyper)
    if train_w.shape[0] == 0:
        return PredictiveGaussian(
            mean=np.zeros((m, train_z.shape[1])), covariance=s4
        )
    if train_w.shape[0] != train_z.shape[0]:
        raise ValueError("training inputs and responses disagree in count")
    s1 = gram(train_w, hyper)
    s3 = _cross_gram(test_u, train_w, hyper)
    cf, _ = _factor(s1, hyper)
    mean = s3 @ cho_solve(cf, train_z)
    cov = s4 - s3 @ cho_solve(cf, s3.T)
    cov = 0.5 * (cov + cov.T)
    d = np.diag(cov).copy()
    np.fill_diagonal(cov, np.clip(d, 0.0, None))
    return PredictiveGaussian(mean=mean, covariance=cov)


def _log_marginal_terms(sq: np.ndarray, Z: np.ndarray, hyper: GpHyperParams):
    """Value (and ingredients) of the un-halved log marginal likelihood."""
    N, q = Z.shape
    K = hyper.A * np.exp(-sq / hyper.rho)
    cf, _ = _factor(K, hyper)
    alpha = cho_solve(cf, Z)
    logdet = 2.0 * np.sum(np.log(np.diag(cf[0])))
    value = -float(np.sum(Z * alpha)) - q * logdet - 0.5 * q * N * _LOG_2PI
    return value, K, cf, alpha


def log_marginal(
    train_w: np.ndarray, train_z: np.ndarray, hyper: GpHyperParams
) -> float:
    """Un-halved log marginal likelihood of the responses."""
    train_w = np.atleast_2d(np.asarray(train_w, dtype=float))
    train_z = np.atleast_2d(np.asarray(train_z, dtype=float))
    if train_w.shape[0] < 1:
        raise ValueError("need at least one training point")
    sq = cdist(train_w, train_w, "sqeuclidean")
    value, _, _, _ = _log_marginal_terms(sq, train_z, hyper)
    return value


def log_marginal_gradient(
    train_w: np.ndarray, train_z: np.ndarray, hyper: GpHyperParams
) -> np.ndarray:
    """Gradient of log_marginal with respect to (log A, log rho, log sigma)."""
    train_w = np.atleast_2d(np.asarray(train_w, dtype=float))
    train_z = np.atleast_2d(np.asarray(train_z, dtype=float))
    sq = cdist(train_w, train_w, "sqeuclidean")
    _, grad = _value_grad_single(sq, train_z, hyper)
    return grad


def _value_grad_single(sq: np.ndarray, Z: np.ndarray, hyper: GpHyperParams):
    N, q = Z.shape
    value, K, cf, alpha = _log_marginal_terms(sq, Z, hyper)
    Kinv = cho_solve(cf, np.eye(N))

    def component(G):
        # d/dtheta [-tr(Z^T K^-1 Z) - q log det K] with dK/dtheta = G
        return float(np.sum((G @ alpha) * alpha) - q * np.sum(Kinv * G))

    g_log_a = component(K)
    g_log_rho = component(K * (sq / hyper.rho))
    # dK/dlog sigma = 2 sigma^2 I, so the trace contractions collapse
    g_log_sigma = 2.0 * hyper.sigma ** 2 * float(
        np.sum(alpha * alpha) - q * np.trace(Kinv)
    )
    return value, np.array([g_log_a, g_log_rho, g_log_sigma])


def joint_log_marginal(
    charts: list[ChartRegression], hyper: GpHyperParams
) -> float:
    """Sum of per-chart log marginal likelihoods under shared hyperparameters."""
    if not charts:
        raise ValueError("charts list is empty")
    total = 0.0
    for k, chart in enumerate(charts):
        if chart.predictors.shape[0] == 0:
            continue
        try:
            total += log_marginal(chart.predictors, chart.responses, hyper)
        except FactorizationError as exc:
            raise FactorizationError(f"chart {k}: {exc}") from exc
    return total


def _chart_arrays(charts: list[ChartRegression]):
    out = []
    for chart in charts:
        if chart.predictors.shape[0] == 0:
            continue
        w = chart.predictors
        out.append((cdist(w, w, "sqeuclidean"), chart.responses))
    return out


def default_init(charts: list[ChartRegression]) -> GpHyperParams:
    """Scale-aware starting point: A from response variance, rho from
    predictor spread, sigma at a tenth of the signal scale."""
    var_sum, var_cnt = 0.0, 0
    sq_all = []
    for chart in charts:
        if chart.responses.size:
            var_sum += float(np.sum(chart.responses ** 2))
            var_cnt += chart.responses.size
        w = chart.predictors
        if w.shape[0] > 1:
            sq = cdist(w, w, "sqeuclidean")
            sq_all.append(sq[np.triu_indices_from(sq, k=1)])
    A = var_sum / var_cnt if var_cnt else 1.0
    A = max(A, 1e-12)
    rho = float(np.median(np.concatenate(sq_all))) if sq_all else 1.0
    rho = max(rho, 1e-12)
    return GpHyperParams(A=A, rho=rho, sigma=0.1 * np.sqrt(A))


def fit_hyperparams(
    charts: list[ChartRegression],
    init: GpHyperParams | None = None,
) -> GpHyperParams:
    """Maximize the joint log marginal likelihood over (A, rho, sigma).

    L-BFGS in log-parameter space from the supplied init plus a fixed
    one-decade multi-start grid; deterministic, and the returned point is
    never worse than the init.
    """
    if not charts:
        raise ValueError("charts list is empty")
    if init is None:
        init = default_init(charts)
    data = _chart_arrays(charts)
    if not data:
        raise OptimizationError("all charts are empty")

    def neg(theta):
        hyper = GpHyperParams(
            A=np.exp(theta[0]),
            rho=np.exp(theta[1]),
            sigma=max(np.exp(theta[2]), SIGMA_FLOOR),
        )
        value = 0.0
        grad = np.zeros(3)
        try:
            for sq, Z in data:
                v, g = _value_grad_single(sq, Z, hyper)
                value += v
                grad += g
        except FactorizationError:
            return np.inf, np.zeros(3)
        return -value, -grad

    t0 = np.log([init.A, init.rho, max(init.sigma, SIGMA_FLOOR)])
    shift = np.log(10.0)
    starts = [t0]
    for i in range(3):
        for s in (-shift, shift):
            t = t0.copy()
            t[i] += s
            starts.append(t)
    bounds = [(-40.0, 40.0), (-40.0, 40.0), (np.log(SIGMA_FLOOR), 40.0)]

    best_theta, best_val = t0, neg(t0)[0]
    any_ok = np.isfinite(best_val)
    for t in starts:
        res = minimize(neg, t, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 200})
        if np.isfinite(res.fun) and res.fun < best_val:
            best_theta, best_val = res.x, res.fun
            any_ok = True
    if not any_ok:
        raise OptimizationError("factorization failed from every start")
    return GpHyperParams(
        A=float(np.exp(best_theta[0])),
        rho=float(np.exp(best_theta[1])),
        sigma=float(max(np.exp(best_theta[2]), SIGMA_FLOOR)),
    )
