"""The full distillation objective and its gradient.

    total = sup + alpha * (scale_y + period_y) + beta * (scale_h + period_h)

Prediction-level terms compare de-normalized forecasts [B, S, C] along the
horizon axis; feature-level terms compare the student's hidden features with
the regressed teacher features [B, D, C] along the feature axis.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import student as st
from .config import DistillConfig
from .dataio import DataError
from .multiscale import scale_loss_and_grads
from .spectral import period_kl_and_grads
from .teacher import Regressor, TeacherOutputs, regressor_apply, regressor_backward


@dataclass(frozen=True)
class LossBreakdown:
    sup: float = 0.0
    scale_y: float = 0.0
    scale_h: float = 0.0
    period_y: float = 0.0
    period_h: float = 0.0
    gt_scale: float = 0.0
    gt_period: float = 0.0
    total: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def sup_loss(y_hat_s: np.ndarray, y: np.ndarray) -> float:
    if y_hat_s.shape != y.shape:
        raise ValueError(f"shape mismatch: {y_hat_s.shape} vs {y.shape}")
    return float(np.mean((np.asarray(y_hat_s) - y) ** 2))


def _check_alignment(Y: np.ndarray, teacher: TeacherOutputs) -> None:
    if teacher.y_hat_t.shape != Y.shape:
        raise DataError(f"teacher predictions {teacher.y_hat_t.shape} not aligned with batch {Y.shape}")


def _terms(y_s, h_s, Y, teacher, regressor, cfg: DistillConfig, need_grad: bool):
    """Evaluate every enabled term; returns (breakdown, d_y_s, d_h_s, d_regressed)."""
    _check_alignment(Y, teacher)
    a, b = cfg.alpha, cfg.beta
    vals = dict.fromkeys(("sup", "scale_y", "scale_h", "period_y", "period_h", "gt_scale", "gt_period"), 0.0)
    d_y = np.zeros_like(y_s)
    d_h = np.zeros_like(h_s)
    d_reg = None

    diff = y_s - Y
    vals["sup"] = float(np.mean(diff * diff))
    if cfg.use_sup:
        d_y += 2.0 * diff / diff.size

    # terms are evaluated even at zero weight so the breakdown stays informative
    pred_on = cfg.use_pred_level
    feat_on = cfg.use_feat_level
    if pred_on:
        y_t = teacher.y_hat_t
        if cfg.use_scale:
            vals["scale_y"], _, g = scale_loss_and_grads(y_t, y_s, cfg.M, axis=1)
            d_y += a * g
        if cfg.use_period:
            vals["period_y"], _, g = period_kl_and_grads(y_t, y_s, cfg.tau, axis=1, amp_scale=cfg.amp_scale)
            d_y += a * g
    if feat_on:
        h_reg = regressor_apply(regressor, teacher.h_t)
        d_reg = np.zeros_like(h_reg)
        want_t = not cfg.regressor_stop_grad and b > 0
        if cfg.use_scale:
            vals["scale_h"], gt, gs = scale_loss_and_grads(h_reg, h_s, cfg.M, axis=1)
            d_h += b * gs
            d_reg += b * gt
        if cfg.use_period:
            vals["period_h"], gt, gs = period_kl_and_grads(
                h_reg, h_s, cfg.tau, axis=1, teacher_grad=want_t and need_grad, amp_scale=cfg.amp_scale
            )
            d_h += b * gs
            if gt is not None:
                d_reg += b * gt
        if not want_t:
            d_reg = None
    if cfg.use_gt_pattern:
        vals["gt_scale"], _, g = scale_loss_and_grads(Y, y_s, cfg.M, axis=1)
        d_y += g
        vals["gt_period"], _, g = period_kl_and_grads(Y, y_s, cfg.tau, axis=1, amp_scale=cfg.amp_scale)
        d_y += g

    total = (vals["sup"] if cfg.use_sup else 0.0)
    total += a * (vals["scale_y"] + vals["period_y"]) + b * (vals["scale_h"] + vals["period_h"])
    total += vals["gt_scale"] + vals["gt_period"]
    return LossBreakdown(**vals, total=total), d_y, d_h, d_reg


def total_loss(
    Y: np.ndarray,
    student_out: st.StudentOutput,
    teacher_out: TeacherOutputs,
    regressor: Regressor,
    cfg: DistillConfig,
) -> LossBreakdown:
    """Loss breakdown for one batch; ``teacher_out`` must be aligned to ``Y``."""
    bd, *_ = _terms(student_out.y_hat, student_out.h, np.asarray(Y, dtype=np.float64), teacher_out, regressor, cfg, need_grad=False)
    return bd


def loss_and_grads(
    params: st.StudentParams,
    regressor: Regressor,
    X: np.ndarray,
    Y: np.ndarray,
    teacher_out: TeacherOutputs,
    cfg: DistillConfig,
) -> tuple[LossBreakdown, dict[str, np.ndarray]]:
    """Forward, loss and reverse pass. Gradients cover student and regressor only."""
    out = st.forward(params, X, cfg.norm_mode, keep_cache=True)
    bd, d_y, d_h, d_reg = _terms(out.y_hat, out.h, np.asarray(Y, dtype=np.float64), teacher_out, regressor, cfg, need_grad=True)
    grads = st.backward(params, out, d_y, d_h)
    if d_reg is not None:
        grads.update(regressor_backward(teacher_out.h_t, d_reg))
    else:
        grads["W_r"] = np.zeros_like(regressor.W_r)
        grads["b_r"] = np.zeros_like(regressor.b_r)
    return bd, grads


def gt_pattern_loss(y_hat_s: np.ndarray, y: np.ndarray, cfg: DistillConfig) -> float:
    """Multi-scale MSE plus period KL measured against the ground truth."""
    if y_hat_s.shape != y.shape:
        raise ValueError(f"shape mismatch: {y_hat_s.shape} vs {y.shape}")
    axis = 1 if np.ndim(y) == 3 else 0
    s, _, _ = scale_loss_and_grads(np.asarray(y, float), np.asarray(y_hat_s, float), cfg.M, axis=axis)
    p, _, _ = period_kl_and_grads(np.asarray(y, float), np.asarray(y_hat_s, float), cfg.tau, axis=axis, amp_scale=cfg.amp_scale)
    return s + p
