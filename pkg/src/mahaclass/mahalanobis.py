"""Squared Mahalanobis distance, its similarity kernel, and the
Beta-distribution decision rule with dev-set threshold calibration.

A query is tested by appending it to the target statistics, computing its
squared distance under the updated mean/covariance, and normalizing to
T = (n+1)/n^2 * d^2, which under the Gaussian null follows
Beta(d/2, (n-d)/2).  The query never persists into the model: each
decision scores against a frozen snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .betadist import BetaParams, beta_quantile, reg_inc_beta
from .errors import (
    DegenerateDevSet,
    DimensionMismatch,
    InsufficientSamples,
    ShapeMismatch,
)
from .linalg import GaussianModel, append_point, spd_solve

TARGET = 1
NON_TARGET = 0


@dataclass(frozen=True)
class DecisionScore:
    d2: float
    T: float


@dataclass(frozen=True)
class DecisionThreshold:
    beta_level: float
    params: BetaParams
    v_beta: float

    @classmethod
    def for_model(cls, model: GaussianModel, beta_level: float) -> "DecisionThreshold":
        params = null_beta_params(model)
        return cls(beta_level=beta_level, params=params,
                   v_beta=beta_quantile(params, beta_level))


def null_beta_params(model: GaussianModel) -> BetaParams:
    """Beta shapes of the normalized statistic for an appended query."""
    n, d = model.n, model.d
    if n <= d + 1:
        raise InsufficientSamples(f"need n > d+1, got n={n}, d={d}")
    return BetaParams(d / 2.0, (n - d) / 2.0)


def sq_mahalanobis(model: GaussianModel, x: np.ndarray) -> float:
    """(x - mu)^T (Sigma + ridge*I)^{-1} (x - mu); zero iff x == mu."""
    x = np.asarray(x, dtype=float)
    delta = x - model.mean  # shape check happens in spd_solve
    w = spd_solve(model, delta)
    return max(float(delta @ w), 0.0)


def sim_mah(model: GaussianModel, x: np.ndarray, y: np.ndarray) -> float:
    """exp(-q/d) with q the squared Mahalanobis form of x - y; in (0, 1]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes differ: {x.shape} vs {y.shape}")
    delta = x - y
    q = max(float(delta @ spd_solve(model, delta)), 0.0)
    return float(np.exp(-q / model.d))


def decision_statistic(model: GaussianModel, x: np.ndarray) -> DecisionScore:
    """Append x, evaluate its squared distance, normalize to the Beta scale."""
    n = model.n
    if n <= model.d + 1:
        raise InsufficientSamples(f"need n > d+1, got n={n}, d={model.d}")
    updated = append_point(model, x)
    d2 = sq_mahalanobis(updated, np.asarray(x, dtype=float))
    t = (n + 1) / n**2 * d2
    return DecisionScore(d2=d2, T=float(min(max(t, 0.0), 1.0)))


def beta_decide(model: GaussianModel, x: np.ndarray, thr: DecisionThreshold) -> int:
    """1 (target) iff the normalized statistic falls strictly below v_beta."""
    expected = null_beta_params(model)
    if not (np.isclose(thr.params.a, expected.a) and np.isclose(thr.params.b, expected.b)):
        raise ShapeMismatch(
            f"threshold shapes {thr.params} do not match model (n={model.n}, d={model.d})")
    score = decision_statistic(model, x)
    return TARGET if score.T < thr.v_beta else NON_TARGET


def _confusion(predictions: np.ndarray, truth: np.ndarray):
    tp = int(np.sum((predictions == TARGET) & (truth == TARGET)))
    fp = int(np.sum((predictions == TARGET) & (truth == NON_TARGET)))
    tn = int(np.sum((predictions == NON_TARGET) & (truth == NON_TARGET)))
    fn = int(np.sum((predictions == NON_TARGET) & (truth == TARGET)))
    return tp, fp, tn, fn


def _f1_fpr(t_values: np.ndarray, truth: np.ndarray, v: float):
    preds = np.where(t_values < v, TARGET, NON_TARGET)
    tp, fp, tn, fn = _confusion(preds, truth)
    f1 = 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) > 0 else 0.0
    fpr = fp / (fp + tn) if (fp + tn) > 0 else 0.0
    return f1, fpr


def calibrate(model: GaussianModel, dev_vectors, dev_labels,
              objective: str = "f1", fpr_cap: float = 0.05) -> DecisionThreshold:
    """Pick the quantile level maximizing the objective on the dev split.

    Candidates are the dev statistics' own quantile levels plus a grid of
    99 evenly spaced levels; ties break toward the smaller level (lower
    false positive rate).  objective is "f1" or "f1-fpr-cap".
    """
    if objective not in ("f1", "f1-fpr-cap"):
        raise ValueError(f"unknown objective {objective!r}")
    vectors = np.asarray(dev_vectors, dtype=float)
    truth = np.asarray(dev_labels, dtype=int)
    if len(set(truth.tolist())) < 2:
        raise DegenerateDevSet("dev split must contain both classes")
    params = null_beta_params(model)
    t_values = np.array([decision_statistic(model, v).T for v in vectors])

    # (beta_level, critical value) candidates; a dev statistic t maps back
    # to the level I_t(a, b), whose quantile is t itself.
    candidates = [(reg_inc_beta(params, t), t) for t in sorted(set(t_values.tolist()))]
    for g in np.linspace(0.01, 0.99, 99):
        candidates.append((float(g), beta_quantile(params, float(g))))
    candidates = [(b, v) for b, v in candidates if 0.0 < b < 1.0]
    candidates.sort()

    best = None
    for beta_level, v in candidates:
        f1, fpr = _f1_fpr(t_values, truth, v)
        if objective == "f1-fpr-cap" and fpr > fpr_cap:
            continue
        # strict > keeps the smallest beta_level among ties
        if best is None or f1 > best[0]:
            best = (f1, beta_level, v)
    if best is None:
        # nothing satisfied the cap; fall back to the lowest-FPR candidate
        scored = [(_f1_fpr(t_values, truth, v)[1], b, v) for b, v in candidates]
        fpr, beta_level, v = min(scored)
        return DecisionThreshold(beta_level=beta_level, params=params, v_beta=v)
    _, beta_level, v = best
    return DecisionThreshold(beta_level=beta_level, params=params, v_beta=v)
