"""Contrastive losses over projected embeddings and their analytic
gradients.

Gradients are taken with respect to the projected coordinates only; the
Gaussian statistics supplied by the sliding window are treated as
constants within a step (stop-gradient through mean and covariance).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyBatch, ZeroVector
from .linalg import GaussianModel, spd_solve

LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class ContrastTriple:
    """Anchor (target), positive (target, distinct item), negative."""

    anchor: np.ndarray
    positive: np.ndarray
    negative: np.ndarray
    anchor_idx: int = -1
    positive_idx: int = -1
    negative_idx: int = -1


@dataclass(frozen=True)
class LossValue:
    value: float
    grads: list = field(default_factory=list)


def _check_batch(batch):
    if not batch:
        raise EmptyBatch("batch must be nonempty")


def _sim_and_grad(model: GaussianModel, u: np.ndarray, v: np.ndarray):
    """sim_mah(u, v) and d(sim)/du (the v-gradient is its negation)."""
    delta = np.asarray(u, float) - np.asarray(v, float)
    if delta.shape != (model.d,):
        raise DimensionMismatch(f"expected dimension {model.d}, got {delta.shape}")
    w = spd_solve(model, delta)
    q = max(float(delta @ w), 0.0)
    s = float(np.exp(-q / model.d))
    grad_u = s * (-2.0 / model.d) * w
    return s, grad_u


def mah_loss(batch: list[ContrastTriple], model: GaussianModel) -> LossValue:
    """Mean over triples of sim(x, y-) / (sim(x, x+) + sim(x, y-))."""
    _check_batch(batch)
    m = len(batch)
    total = 0.0
    grads = []
    for t in batch:
        sp, dsp_dx = _sim_and_grad(model, t.anchor, t.positive)
        sn, dsn_dx = _sim_and_grad(model, t.anchor, t.negative)
        denom = sp + sn
        total += sn / denom
        # d(sn/(sp+sn)) = (sp*dsn - sn*dsp) / denom^2
        c_p = -sn / denom**2
        c_n = sp / denom**2
        ga = (c_p * dsp_dx + c_n * dsn_dx) / m
        gp = (-c_p * dsp_dx) / m
        gn = (-c_n * dsn_dx) / m
        grads.append((ga, gp, gn))
    return LossValue(value=total / m, grads=grads)


def mah_mean_loss(targets, negatives, model: GaussianModel) -> LossValue:
    """-mean over pairs of [log sim(mu, x) + log(1 - sim(mu, y-))].

    Similarities are clamped to [eps, 1-eps]; clamped terms contribute
    zero gradient.
    """
    targets = list(targets)
    negatives = list(negatives)
    _check_batch(targets)
    if len(targets) != len(negatives):
        raise DimensionMismatch("targets and negatives must be paired")
    m = len(targets)
    mu = model.mean
    total = 0.0
    grads = []
    for x, y in zip(targets, negatives):
        sx, _ = _sim_and_grad(model, mu, x)
        sy, _ = _sim_and_grad(model, mu, y)
        sx_c = min(max(sx, LOG_CLAMP), 1.0 - LOG_CLAMP)
        sy_c = min(max(sy, LOG_CLAMP), 1.0 - LOG_CLAMP)
        total += -(np.log(sx_c) + np.log1p(-sy_c))
        if sx_c == sx:
            gx = (2.0 / model.d) * spd_solve(model, np.asarray(x, float) - mu) / m
        else:
            gx = np.zeros(model.d)
        if sy_c == sy:
            wy = spd_solve(model, np.asarray(y, float) - mu)
            gy = (-2.0 / model.d) * (sy / (1.0 - sy)) * wy / m
        else:
            gy = np.zeros(model.d)
        grads.append((gx, gy))
    return LossValue(value=total / m, grads=grads)


def _cos_and_grad(u: np.ndarray, v: np.ndarray):
    """(1 + cos(u, v)) / 2 and its u-gradient (mapped to (0, 1])."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    if u.shape != v.shape:
        raise DimensionMismatch(f"shapes differ: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for zero vectors")
    c = float(u @ v) / (nu * nv)
    s = 0.5 * (1.0 + c)
    grad_u = 0.5 * (v / (nu * nv) - c * u / nu**2)
    grad_v = 0.5 * (u / (nu * nv) - c * v / nv**2)
    return s, grad_u, grad_v


def cosine_loss(batch: list[ContrastTriple]) -> LossValue:
    """Ablation: the same contrastive ratio with cosine similarity
    rescaled from [-1, 1] to [0, 1]."""
    _check_batch(batch)
    m = len(batch)
    total = 0.0
    grads = []
    for t in batch:
        sp, dsp_dx, dsp_dp = _cos_and_grad(t.anchor, t.positive)
        sn, dsn_dx, dsn_dn = _cos_and_grad(t.anchor, t.negative)
        denom = sp + sn
        total += sn / denom
        c_p = -sn / denom**2
        c_n = sp / denom**2
        ga = (c_p * dsp_dx + c_n * dsn_dx) / m
        gp = (c_p * dsp_dp) / m
        gn = (c_n * dsn_dn) / m
        grads.append((ga, gp, gn))
    return LossValue(value=total / m, grads=grads)
