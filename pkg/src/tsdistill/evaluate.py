"""Metrics, win analyses and CSV diagnostics for plotting."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import student as st
from .multiscale import build_pyramid
from .spectral import dft_amplitude


@dataclass(frozen=True)
class ErrorVector:
    e: np.ndarray
    label: str = ""

    def __post_init__(self):
        e = np.asarray(self.e, dtype=np.float64)
        if (e < 0).any():
            raise ValueError("per-sample errors must be non-negative")
        object.__setattr__(self, "e", e)


def _check(y_hat, y):
    y_hat, y = np.asarray(y_hat, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if y_hat.shape != y.shape:
        raise ValueError(f"shape mismatch: {y_hat.shape} vs {y.shape}")
    return y_hat, y


def mse(y_hat, y) -> float:
    y_hat, y = _check(y_hat, y)
    return float(np.mean((y - y_hat) ** 2))


def mae(y_hat, y) -> float:
    y_hat, y = _check(y_hat, y)
    return float(np.mean(np.abs(y - y_hat)))


def per_sample_mse(y_hat, y, label: str = "") -> ErrorVector:
    """MSE over each sample's full [S, C] block."""
    y_hat, y = _check(y_hat, y)
    return ErrorVector(((y - y_hat) ** 2).reshape(y.shape[0], -1).mean(axis=1), label)


def win_ratio(e_s: ErrorVector, e_t: ErrorVector) -> float:
    """Fraction of samples where the student is strictly better; ties lose."""
    if e_s.e.shape != e_t.e.shape:
        raise ValueError(f"length mismatch: {e_s.e.shape} vs {e_t.e.shape}")
    if e_s.e.size == 0:
        raise ValueError("empty error vectors")
    return float(np.mean(e_s.e < e_t.e))


def win_set(e_s: ErrorVector, e_t: ErrorVector) -> set[int]:
    return set(np.flatnonzero(e_s.e < e_t.e).tolist())


def win_keep(u_m, u_t) -> float:
    u_m, u_t = set(u_m), set(u_t)
    if not u_m:
        raise ValueError("win_keep needs a non-empty reference win set")
    return len(u_m & u_t) / len(u_m)


def predict(params: st.StudentParams, X: np.ndarray, chunk: int = 256) -> np.ndarray:
    outs = [st.forward(params, X[i : i + chunk]).y_hat for i in range(0, X.shape[0], chunk)]
    return np.concatenate(outs, axis=0)


def metrics_summary(y_hat, y, **extra) -> dict:
    doc = {
        "mse": mse(y_hat, y),
        "mae": mae(y_hat, y),
        "n_windows": int(np.shape(y)[0]),
        "horizon": int(np.shape(y)[1]),
    }
    doc.update({k: v for k, v in extra.items() if v is not None})
    return doc


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def export_pyramid(y_hat: np.ndarray, y: np.ndarray, M: int, path: str | Path) -> int:
    """Write one sample's prediction/truth pyramids as long-form CSV; returns row count."""
    y_hat, y = _check(y_hat, y)
    p_pred, p_true = build_pyramid(y_hat, M), build_pyramid(y, M)
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["scale", "t", "channel", "prediction", "truth"])
        for m, (a, b) in enumerate(zip(p_pred.levels, p_true.levels)):
            for t in range(a.shape[0]):
                for c in range(a.shape[1]):
                    w.writerow([m, t, c, _fmt(a[t, c]), _fmt(b[t, c])])
                    rows += 1
    return rows


def export_spectrogram(y_hat: np.ndarray, y: np.ndarray, path: str | Path) -> int:
    y_hat, y = _check(y_hat, y)
    sp_pred, sp_true = dft_amplitude(y_hat), dft_amplitude(y)
    periods = sp_pred.periods()
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["bin", "period", "channel", "amp_prediction", "amp_truth"])
        for k in range(sp_pred.amp.shape[0]):
            for c in range(sp_pred.amp.shape[1]):
                w.writerow([k + 1, int(periods[k]), c, _fmt(sp_pred.amp[k, c]), _fmt(sp_true.amp[k, c])])
                rows += 1
    return rows
