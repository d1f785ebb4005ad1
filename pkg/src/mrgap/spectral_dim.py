"""Diffusion-map Laplacian and intrinsic-dimension estimation.

Noise inflates every eigenvalue of the raw local covariance matrices, so
the dimension is read off a diffusion-map re-embedding instead: embed the
cloud with the leading Laplacian eigenvectors, average the local
covariance spectra there, and look for the largest spectral-gap ratio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .local_geometry import local_covariance
from .point_cloud import PointCloud

__all__ = [
    "DiffusionSpectrum",
    "DimensionProfile",
    "graph_laplacian",
    "diffusion_embedding",
    "mean_local_eigenvalues",
    "estimate_dimension",
]


@dataclass(frozen=True)
class DiffusionSpectrum:
    """Leading eigenpairs of minus the normalized graph Laplacian.

    Eigenvalues ascend from mu_0 ~ 0; eigenvectors are l2-normalized
    columns with deterministic signs.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # (n, ell + 1)


@dataclass(frozen=True)
class DimensionProfile:
    epsilons: list[float]
    lambda_bars: list[np.ndarray]
    estimated_dim: int


def graph_laplacian(cloud: PointCloud, eps_dm: float) -> np.ndarray:
    """Density-normalized graph Laplacian L = (D^-1 W - I) / eps_dm^2.

    W is the Gaussian kernel matrix with each entry divided by the
    product of its row and column kernel degrees (density correction).
    """
    if cloud.n < 2:
        raise ValueError("need at least 2 points")
    if eps_dm <= 0:
        raise ValueError("eps_dm must be positive")
    sq = cdist(cloud.points, cloud.points, "sqeuclidean")
    k = np.exp(-sq / eps_dm ** 2)
    q = k.sum(axis=1)
    W = k / np.outer(q, q)
    deg = W.sum(axis=1)
    return ((W / deg[:, None]) - np.eye(cloud.n)) / eps_dm ** 2


def diffusion_embedding(L: np.ndarray, ell: int) -> DiffusionSpectrum:
    """First ell + 1 eigenpairs of -L in ascending order.

    -L is conjugate to a symmetric matrix through the degree scaling, so
    a symmetric eigensolver is used and the eigenvectors transformed back
    and l2-normalized.  Signs are fixed so each vector's largest-magnitude
    entry is positive.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if not 0 <= ell < n:
        raise ValueError("ell must satisfy 0 <= ell < n")
    # Shift L to a row-stochastic-like matrix M = c*L + I.  The exact
    # kernel bandwidth is irrelevant here: eigenvectors are unchanged and
    # the eigenvalues of -L are recovered as (1 - nu)/c.
    c = -1.0 / np.min(np.diag(L))
    M = c * L + np.eye(n)
    # M is conjugate to a symmetric matrix via the degree scaling.  The
    # degrees are recoverable from detailed balance: M_ij / M_ji =
    # deg_j / deg_i, with strictly positive entries for a Gaussian kernel.
    off = M - np.diag(np.diag(M))
    if np.min(off + np.eye(n)) <= 0.0:
        raise ValueError("Laplacian off-diagonal entries must be positive")
    deg = np.ones(n)
    deg[1:] = M[0, 1:] / M[1:, 0]
    s = np.sqrt(deg)
    S = (M * s[:, None]) / s[None, :]
    S = 0.5 * (S + S.T)
    nu, phi = np.linalg.eigh(S)
    # largest nu first => smallest mu of -L first
    order = np.argsort(nu)[::-1][: ell + 1]
    nu = nu[order]
    V = phi[:, order] / s[:, None]
    V /= np.linalg.norm(V, axis=0, keepdims=True)
    flip = V[np.argmax(np.abs(V), axis=0), np.arange(V.shape[1])] < 0
    V = np.where(flip, -V, V)
    mu = (1.0 - nu) / c
    return DiffusionSpectrum(eigenvalues=mu, eigenvectors=V)


def mean_local_eigenvalues(cloud: PointCloud, epsilon: float) -> np.ndarray:
    """Descending local-covariance eigenvalues averaged over all points."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    acc = np.zeros(cloud.ambient_dim)
    for k in range(cloud.n):
        C = local_covariance(cloud, k, epsilon)
        acc += np.clip(np.linalg.eigvalsh(C)[::-1], 0.0, None)
    return acc / cloud.n


GAP_DAMPING = 0.05


def _gap_index(lam: np.ndarray) -> int:
    """1-based index of the largest damped ratio
    lambda_i / (lambda_{i+1} + eta * lambda_1).

    The damping term keeps ratios between two already-negligible tail
    eigenvalues from outscoring the drop after the last large one.
    """
    ratios = lam[:-1] / (lam[1:] + GAP_DAMPING * lam[0])
    return int(np.argmax(ratios)) + 1


def estimate_dimension(
    cloud: PointCloud,
    eps_dm: float,
    embed_dims: list[int] | None = None,
    eps_grid: list[float] | None = None,
) -> DimensionProfile:
    """Estimate intrinsic dimension via diffusion-map re-embedding.

    For each target embedding dimension m the cloud is re-embedded with
    the eigenvectors V_1..V_m (scaled by sqrt(n) so coordinates match the
    empirical-measure normalization of the eigenfunctions), the mean
    local-covariance spectrum is computed at the matching bandwidth, and
    each spectrum votes for its largest-gap index.  The default bandwidth
    for embedding dimension m is 0.3 + 0.1 * (m - 2).
    """
    if embed_dims is None:
        embed_dims = [3, 4, 5, 6]
    if not embed_dims:
        raise ValueError("embed_dims is empty")
    if eps_grid is not None and not eps_grid:
        raise ValueError("eps_grid is empty")
    max_m = max(embed_dims)
    L = graph_laplacian(cloud, eps_dm)
    spec = diffusion_embedding(L, max_m)
    scale = np.sqrt(cloud.n)

    epsilons: list[float] = []
    lambda_bars: list[np.ndarray] = []
    votes: list[int] = []
    for m in embed_dims:
        coords = spec.eigenvectors[:, 1 : m + 1] * scale
        embedded = PointCloud(coords)
        eps_list = eps_grid if eps_grid is not None else [0.3 + 0.1 * (m - 2)]
        for eps in eps_list:
            lam = mean_local_eigenvalues(embedded, eps)
            epsilons.append(float(eps))
            lambda_bars.append(lam)
            votes.append(_gap_index(lam))
    counts = np.bincount(votes)
    d_hat = int(np.argmax(counts))
    return DimensionProfile(
        epsilons=epsilons, lambda_bars=lambda_bars, estimated_dim=d_hat
    )
