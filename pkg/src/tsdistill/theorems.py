"""Executable forms of the two mixup bounds.

Each verifier returns the slack ``lhs - rhs``; a correct bound never goes
below zero beyond rounding.
"""

from __future__ import annotations

import numpy as np

TOL = 1e-9


def mixup_scale_margin(y, y_hat_s, teacher_levels, eta: float, reduce: bool = True):
    """Slack of  sup + eta * scale  >=  (y_hat_s - mixed target)^2.

    ``teacher_levels`` holds the M+1 teacher values, each broadcastable to
    ``y``. Evaluated elementwise; ``reduce`` averages the result.
    """
    if not eta > 0:
        raise ValueError("eta must be > 0")
    y = np.asarray(y, dtype=np.float64)
    s = np.asarray(y_hat_s, dtype=np.float64)
    levels = [np.broadcast_to(np.asarray(t, dtype=np.float64), y.shape) for t in teacher_levels]
    if not levels:
        raise ValueError("need at least one teacher level")
    m1 = len(levels)
    lam = 1.0 / (1.0 + eta)
    lhs = (s - y) ** 2 + (eta / m1) * sum((s - t) ** 2 for t in levels)
    mixed = lam * y + (1.0 - lam) * (sum(levels) / m1)
    margin = lhs - (s - mixed) ** 2
    return float(np.mean(margin)) if reduce else margin


def _check_distribution(q: np.ndarray, name: str) -> None:
    if (q <= 0).any():
        raise ValueError(f"{name} must be strictly positive")
    if not np.allclose(q.sum(axis=-1), 1.0, atol=1e-9):
        raise ValueError(f"{name} must sum to 1 along the last axis")


def mixup_period_margin(q_y, q_t, q_s, eta: float, reduce: bool = True):
    """Slack of the log-sum step  KL(q_y||q_s) + eta KL(q_t||q_s) >= mixture term.

    The mixture is left unnormalized:
    sum_k (q_y + eta q_t) log((q_y + eta q_t) / ((1 + eta) q_s)).
    Distributions run along the last axis.
    """
    if not eta > 0:
        raise ValueError("eta must be > 0")
    q_y, q_t, q_s = (np.asarray(q, dtype=np.float64) for q in (q_y, q_t, q_s))
    for q, name in ((q_y, "q_y"), (q_t, "q_t"), (q_s, "q_s")):
        _check_distribution(q, name)
    kl_y = np.sum(q_y * np.log(q_y / q_s), axis=-1)
    kl_t = np.sum(q_t * np.log(q_t / q_s), axis=-1)
    mix = q_y + eta * q_t
    rhs = np.sum(mix * np.log(mix / ((1.0 + eta) * q_s)), axis=-1)
    margin = kl_y + eta * kl_t - rhs
    return float(np.mean(margin)) if reduce else margin


def run_scale_suite(trials: int, etas=(0.1, 1.0, 10.0), Ms=(0, 1, 3), seed: int = 0) -> dict:
    """Random uniform[-1, 1] instances; reports the minimum slack per (eta, M)."""
    rng = np.random.default_rng(seed)
    cases = [(e, m) for e in etas for m in Ms]
    per = max(1, -(-trials // len(cases)))
    out = {}
    for eta, M in cases:
        y = rng.uniform(-1, 1, per)
        s = rng.uniform(-1, 1, per)
        levels = rng.uniform(-1, 1, (M + 1, per))
        out[f"eta={eta},M={M}"] = float(mixup_scale_margin(y, s, list(levels), eta, reduce=False).min())
    return {"n": per * len(cases), "min_margin": min(out.values()), "cases": out}


def _random_simplex(rng, shape, bins):
    z = rng.normal(0.0, 2.0, shape + (bins,))
    z -= z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def run_period_suite(trials: int, etas=(0.5, 1.0, 2.0), bins: int = 48, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    per = max(1, -(-trials // len(etas)))
    out = {}
    for eta in etas:
        q_y, q_t, q_s = (_random_simplex(rng, (per,), bins) for _ in range(3))
        out[f"eta={eta}"] = float(mixup_period_margin(q_y, q_t, q_s, eta, reduce=False).min())
    return {"n": per * len(etas), "min_margin": min(out.values()), "cases": out}
