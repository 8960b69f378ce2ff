"""Distributional diagnostics: PCA reduction, Henze-Zirkler multivariate
normality, Anderson-Darling univariate normality, Q-Q data, and
squared-distance separability reports.

Statistics are reported raw (no p-values); for both tests, larger values
mean greater deviation from normality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve
from scipy.special import ndtr, ndtri

from .errors import (
    DimensionMismatch,
    InsufficientSamples,
    NotPositiveDefinite,
    SingularCovariance,
    ZeroVariance,
)
from .linalg import GaussianModel, cholesky
from .mahalanobis import sq_mahalanobis


@dataclass(frozen=True)
class PcaResult:
    points: np.ndarray
    explained_variance_ratio: np.ndarray
    rank_deficient: bool


@dataclass(frozen=True)
class NormalityReport:
    class_label: int
    hz: float
    ad_per_dim: list[float]
    n: int
    k: int


def pca_reduce(points, k: int) -> PcaResult:
    """Project centered data onto the top-k principal directions.

    When k exceeds the data rank the missing coordinates are zero and
    the result is flagged rank_deficient.
    """
    x = np.asarray(points, dtype=float)
    n, d = x.shape
    if k < 1 or k > min(d, n - 1):
        raise InsufficientSamples(f"need 1 <= k <= min(d, n-1), got k={k}, n={n}, d={d}")
    xc = x - x.mean(axis=0)
    _, s, vt = np.linalg.svd(xc, full_matrices=False)
    var = s**2 / (n - 1)
    total = var.sum()
    rank = int(np.sum(s > s[0] * 1e-12)) if s.size and s[0] > 0 else 0
    reduced = xc @ vt[:k].T
    if rank < k:
        reduced[:, rank:] = 0.0
    ratios = (var[:k] / total) if total > 0 else np.zeros(k)
    return PcaResult(points=reduced, explained_variance_ratio=ratios,
                     rank_deficient=rank < k)


def henze_zirkler(points) -> float:
    """HZ statistic on the standardized sample (MLE covariance), with the
    canonical smoothing bandwidth."""
    x = np.asarray(points, dtype=float)
    n, d = x.shape
    if n <= d:
        raise SingularCovariance(f"need n > d, got n={n}, d={d}")
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / n
    try:
        chol = cholesky(cov)
    except NotPositiveDefinite as exc:
        raise SingularCovariance(str(exc)) from exc
    # G[i, j] = xc_i^T cov^{-1} xc_j; pairwise distances from its diagonal
    b = cho_solve((chol, True), xc.T, check_finite=False)
    gram = xc @ b
    diag = np.diag(gram)
    d_pair = diag[:, None] + diag[None, :] - 2.0 * gram
    np.clip(d_pair, 0.0, None, out=d_pair)

    beta = ((n * (2 * d + 1) / 4.0) ** (1.0 / (d + 4))) / np.sqrt(2.0)
    b2 = beta**2
    term1 = np.mean(np.exp(-0.5 * b2 * d_pair))
    term2 = 2.0 * (1.0 + b2) ** (-d / 2.0) * np.mean(np.exp(-b2 * diag / (2.0 * (1.0 + b2))))
    term3 = (1.0 + 2.0 * b2) ** (-d / 2.0)
    return float(n * (term1 - term2 + term3))


def ad_statistic_from_probs(probs) -> float:
    """A^2 from sorted probability values: the closed formula
    -n - (1/n) sum (2i-1) [ln p_(i) + ln(1 - p_(n+1-i))]."""
    p = np.sort(np.asarray(probs, dtype=float))
    n = p.shape[0]
    p = np.clip(p, 1e-300, 1.0 - 1e-16)
    i = np.arange(1, n + 1)
    return float(-n - np.mean((2 * i - 1) * (np.log(p) + np.log1p(-p[::-1]))))


def anderson_darling(samples) -> float:
    """A^2 against the normal with estimated mean and standard deviation."""
    x = np.asarray(samples, dtype=float)
    if x.shape[0] < 2:
        raise InsufficientSamples("need at least 2 samples")
    s = x.std(ddof=1)
    if s == 0.0:
        raise ZeroVariance("sample is constant")
    z = (x - x.mean()) / s
    return ad_statistic_from_probs(ndtr(np.sort(z)))


def normality_report(vectors, labels, head=None, k: int = 3) -> list[NormalityReport]:
    """Per-class HZ and per-dimension AD statistics in PCA-reduced space.

    ``head`` is an optional projection applied before reduction; None
    analyzes the raw vectors.
    """
    x = np.asarray(vectors, dtype=float)
    y = np.asarray(labels, dtype=int)
    if head is not None:
        x = head.project(x)
    reports = []
    for label in sorted(set(y.tolist())):
        cls = x[y == label]
        if cls.shape[0] <= k:
            raise InsufficientSamples(
                f"class {label} has {cls.shape[0]} samples, need more than k={k}")
        red = pca_reduce(cls, k)
        hz = henze_zirkler(red.points)
        ad = [anderson_darling(red.points[:, j]) for j in range(k)]
        reports.append(NormalityReport(class_label=label, hz=hz, ad_per_dim=ad,
                                       n=cls.shape[0], k=k))
    return reports


def emit_qq(samples) -> list[tuple[float, float]]:
    """Normal Q-Q pairs: (theoretical quantile at (i-0.5)/n, standardized
    order statistic)."""
    x = np.asarray(samples, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise InsufficientSamples("need at least 2 samples")
    s = x.std(ddof=1)
    if s == 0.0:
        raise ZeroVariance("sample is constant")
    z = np.sort((x - x.mean()) / s)
    theo = ndtri((np.arange(1, n + 1) - 0.5) / n)
    return list(zip(theo.tolist(), z.tolist()))


def emit_distance_report(data, head, model: GaussianModel) -> list[tuple[str, int, float]]:
    """One (id, label, squared distance) record per instance, ordered by id."""
    records = sorted(data.records, key=lambda r: r.id)
    out = []
    for r in records:
        v = head.project(r.vector) if head is not None else r.vector
        if v.shape[0] != model.d:
            raise DimensionMismatch(
                f"record {r.id!r}: projected dimension {v.shape[0]} vs model {model.d}")
        out.append((r.id, r.label, sq_mahalanobis(model, v)))
    return out
