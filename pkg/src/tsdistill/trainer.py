"""Adam, early stopping, the distillation training loop and gradient checking."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import student as st
from .config import RunConfig
from .dataio import SeriesDataset, SplitWindows
from .distill import LossBreakdown, loss_and_grads
from .evaluate import mae, mse, predict
from .teacher import Regressor, TeacherOutputs

log = logging.getLogger(__name__)


@dataclass
class OptimState:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: OptimState) -> None:
    """Bias-corrected Adam update, applied to ``params`` in place."""
    for name, g in grads.items():
        if name not in params:
            raise KeyError(f"gradient for unknown tensor {name!r}")
        if g.shape != params[name].shape:
            raise ValueError(f"{name}: gradient shape {g.shape} != parameter shape {params[name].shape}")
        if not np.isfinite(g).all():
            bad = int(np.size(g) - np.isfinite(g).sum())
            raise FloatingPointError(f"non-finite gradient in {name!r} ({bad} entries)")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for name, g in grads.items():
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        params[name] -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


class EarlyStopping:
    """Track the best (lowest) validation score; signal a stop after ``patience`` misses."""

    def __init__(self, patience: int = 5):
        self.patience = patience
        self.best = np.inf
        self.best_epoch = 0
        self.misses = 0

    def update(self, epoch: int, score: float) -> bool:
        """Record ``score`` for ``epoch``; returns True when training should stop."""
        if score < self.best:
            self.best, self.best_epoch, self.misses = score, epoch, 0
            return False
        self.misses += 1
        return self.misses >= self.patience


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False
    test_mse: float = float("nan")
    test_mae: float = float("nan")

    @property
    def seconds_per_epoch(self) -> list[float]:
        return [e["seconds"] for e in self.epochs]

    def loss_history(self) -> list[dict]:
        """Epoch records without wall-clock fields."""
        return [{k: v for k, v in e.items() if k != "seconds"} for e in self.epochs]

    def to_json(self) -> str:
        doc = {
            "epochs": self.epochs,
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
            "seconds_per_epoch": self.seconds_per_epoch,
            "test_mse": self.test_mse,
            "test_mae": self.test_mae,
        }
        return json.dumps(doc, indent=2)


def _mean_breakdown(parts: list[tuple[int, LossBreakdown]]) -> dict[str, float]:
    n = sum(w for w, _ in parts)
    keys = LossBreakdown().as_dict().keys()
    return {k: sum(w * getattr(bd, k) for w, bd in parts) / n for k in keys}


def train_distill(
    ds: SeriesDataset,
    teacher_train: TeacherOutputs,
    cfg: RunConfig,
    seed: int | None = None,
    max_epochs: int | None = None,
) -> tuple[st.StudentParams, Regressor, TrainReport]:
    """Train a student against a frozen teacher aligned to the train windows."""
    seed = cfg.seed if seed is None else seed
    train = SplitWindows(ds, "train", cfg.T, cfg.S)
    val = SplitWindows(ds, "val", cfg.T, cfg.S)
    if teacher_train.n_windows != len(train):
        raise ValueError(f"teacher covers {teacher_train.n_windows} windows, train split has {len(train)}")
    params = st.init_params(cfg.T, cfg.S, cfg.D, cfg.norm_mode, seed, ds.n_channels, cfg.kernel)
    reg = Regressor.init(cfg.D, teacher_train.D_t, seed + 1)
    rng = np.random.default_rng(seed + 2)
    state = OptimState(lr=cfg.lr)
    report = TrainReport()
    stopper = EarlyStopping(cfg.patience)
    best = (params.copy(), reg.copy())
    val_batch = val.all()

    for epoch in range(1, (max_epochs or cfg.epochs) + 1):
        t0 = time.perf_counter()
        parts = []
        for batch in train.batches(cfg.batch_size, rng.permutation(len(train))):
            tb = teacher_train.take(batch.window_starts)
            bd, grads = loss_and_grads(params, reg, batch.X, batch.Y, tb, cfg)
            if not np.isfinite(bd.total):
                raise FloatingPointError(f"non-finite loss at epoch {epoch}: {bd}")
            tensors = {**params.named_tensors(), **reg.named_tensors()}
            adam_step(tensors, grads, state)
            parts.append((len(batch.window_starts), bd))
        val_mse = mse(predict(params, val_batch.X), val_batch.Y)
        record = _mean_breakdown(parts)
        record.update(epoch=epoch, val_mse=val_mse, seconds=time.perf_counter() - t0)
        report.epochs.append(record)
        log.info("epoch %d total=%.6f sup=%.6f val_mse=%.6f", epoch, record["total"], record["sup"], val_mse)
        stop = stopper.update(epoch, val_mse)
        if stopper.best_epoch == epoch:
            best = (params.copy(), reg.copy())
        if stop:
            report.stopped_early = True
            break

    params, reg = best
    report.best_epoch = stopper.best_epoch
    test = SplitWindows(ds, "test", cfg.T, cfg.S).all()
    y_hat = predict(params, test.X)
    report.test_mse = mse(y_hat, test.Y)
    report.test_mae = mae(y_hat, test.Y)
    return params, reg, report


def gradient_check(loss_fn, params: dict[str, np.ndarray], h: float = 1e-5, max_coords: int = 200, seed: int = 0):
    """Compare analytic gradients against central differences.

    ``loss_fn()`` must evaluate ``(loss, grads)`` from the current contents of
    ``params``; coordinates are perturbed in place and restored.
    Returns ``(max_rel_err, {tensor: max_rel_err})``.
    """
    rng = np.random.default_rng(seed)
    _, grads = loss_fn()
    per_tensor = {}
    for name, arr in params.items():
        if name not in grads:
            continue
        flat = arr.reshape(-1)
        g = grads[name].reshape(-1)
        k = min(max_coords, flat.size)
        coords = rng.choice(flat.size, size=k, replace=False)
        worst = 0.0
        for i in coords:
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn()[0]
            flat[i] = orig - h
            down = loss_fn()[0]
            flat[i] = orig
            num = (up - down) / (2 * h)
            err = abs(g[i] - num) / (abs(g[i]) + abs(num) + 1e-12)
            worst = max(worst, err)
        per_tensor[name] = worst
    return max(per_tensor.values(), default=0.0), per_tensor


def full_loss_gradcheck(
    B: int = 2,
    T: int = 16,
    S: int = 8,
    C: int = 2,
    D: int = 8,
    D_t: int = 6,
    cfg=None,
    seed: int = 0,
    h: float = 1e-5,
    max_coords: int = 200,
):
    """Gradient check of the whole objective on random data and a random teacher.

    ``cfg`` defaults to alpha = beta = 1, tau = 0.5, M = 2. RevIN affine
    parameters are moved off their identity init so their gradients are
    exercised.
    """
    from .config import DistillConfig
    from .distill import loss_and_grads as _lg

    cfg = cfg or DistillConfig(alpha=1.0, beta=1.0, tau=0.5, M=2, D=D, T=T, S=S)
    rng = np.random.default_rng(seed)
    params = st.init_params(T, S, D, cfg.norm_mode, seed + 1, C, cfg.kernel)
    if cfg.norm_mode == "revin":
        params.revin_gamma[:] = rng.uniform(0.5, 1.5, C)
        params.revin_beta[:] = rng.normal(0.0, 0.3, C)
    reg = Regressor.init(D, D_t, seed + 2)
    X = rng.standard_normal((B, T, C))
    Y = rng.standard_normal((B, S, C))
    teacher = TeacherOutputs(rng.standard_normal((B, S, C)), rng.standard_normal((B, D_t, C)))
    tensors = {**params.named_tensors(), **reg.named_tensors()}

    def fn():
        bd, grads = _lg(params, reg, X, Y, teacher, cfg)
        return bd.total, grads

    return gradient_check(fn, tensors, h=h, max_coords=max_coords, seed=seed)
