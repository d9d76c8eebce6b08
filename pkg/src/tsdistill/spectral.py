"""Amplitude spectra, temperature softmax over periods, and KL matching.

All transforms run along one axis of a real array. The transform itself
is an arbitrary-length DFT: radix-2 for powers of two, Bluestein's chirp-z
(three power-of-two FFTs) otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels

AMP_EPS = 1e-12
LOG_EPS = 1e-12


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@lru_cache(maxsize=None)
def _bluestein_tables(n: int) -> tuple[int, np.ndarray, np.ndarray]:
    m = 1 << (2 * n - 2).bit_length()
    k = np.arange(n)
    chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = np.conj(chirp)
    if n > 1:
        b[m - n + 1 :] = np.conj(chirp[1:][::-1])
    fb = _kernels.fft_pow2(b)
    chirp.setflags(write=False)
    fb.setflags(write=False)
    return m, chirp, fb


def fft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Complex DFT of ``x`` along ``axis`` for any length >= 1."""
    x = np.moveaxis(np.asarray(x), axis, -1)
    n = x.shape[-1]
    if _is_pow2(n):
        out = _kernels.fft_pow2(x)
    else:
        m, chirp, fb = _bluestein_tables(n)
        a = np.zeros(x.shape[:-1] + (m,), dtype=np.complex128)
        a[..., :n] = x * chirp
        conv = _kernels.fft_pow2(a) * fb
        # inverse via conjugation: ifft(z) = conj(fft(conj(z))) / m
        conv = np.conj(_kernels.fft_pow2(np.conj(conv))) / m
        out = conv[..., :n] * chirp
    return np.moveaxis(out, -1, axis)


@dataclass(frozen=True)
class Spectrogram:
    """DC-free amplitude spectrum; bins 1..L//2 lie along ``axis``."""

    amp: np.ndarray
    source_length: int
    axis: int = 0

    def periods(self) -> np.ndarray:
        k = np.arange(1, self.source_length // 2 + 1)
        return -(-self.source_length // k)


@dataclass(frozen=True)
class PeriodDistribution:
    q: np.ndarray
    temperature: float
    axis: int = 0


def _amplitude_fwd(x: np.ndarray, axis: int):
    n = x.shape[axis]
    if n < 2:
        raise ValueError(f"spectrum needs length >= 2 along axis {axis}, got {n}")
    full = np.moveaxis(fft(x, axis=axis), axis, -1)
    bins = full[..., 1 : n // 2 + 1]
    return np.abs(bins), bins


def _amplitude_bwd(g_amp: np.ndarray, bins: np.ndarray, amp: np.ndarray, n: int) -> np.ndarray:
    """Adjoint of x -> |DFT(x)|[1..n//2]; inputs and output use the last axis."""
    safe = np.where(amp < AMP_EPS, 1.0, amp)
    coef = np.where(amp < AMP_EPS, 0.0, g_amp / safe) * bins
    full = np.zeros(bins.shape[:-1] + (n,), dtype=np.complex128)
    full[..., 1 : n // 2 + 1] = coef
    # sum_k G_k exp(+2 pi i k t / n) = conj(fft(conj(G)))
    return np.real(fft(np.conj(full), axis=-1))


def dft_amplitude(x: np.ndarray, axis: int = 0) -> Spectrogram:
    x = np.asarray(x, dtype=np.float64)
    amp, _ = _amplitude_fwd(x, axis)
    return Spectrogram(np.moveaxis(amp, -1, axis), x.shape[axis], axis)


def _softmax_last(a: np.ndarray, tau: float) -> np.ndarray:
    z = a / tau
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def period_distribution(sp: Spectrogram, tau: float) -> PeriodDistribution:
    if not tau > 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    amp = np.moveaxis(sp.amp, sp.axis, -1)
    q = _softmax_last(amp, tau)
    return PeriodDistribution(np.moveaxis(q, -1, sp.axis), float(tau), sp.axis)


def _kl_last(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Per-position KL(p || q) summing the last axis."""
    lp = np.log(np.maximum(p, LOG_EPS))
    lq = np.log(np.maximum(q, LOG_EPS))
    return np.sum(p * (lp - lq), axis=-1)


def kl_div(q_t: PeriodDistribution, q_s: PeriodDistribution) -> float:
    """KL(q_t || q_s): summed over bins, averaged over every other position."""
    if q_t.q.shape != q_s.q.shape or q_t.axis != q_s.axis:
        raise ValueError(f"distribution shapes differ: {q_t.q.shape} vs {q_s.q.shape}")
    p = np.moveaxis(q_t.q, q_t.axis, -1)
    q = np.moveaxis(q_s.q, q_s.axis, -1)
    return float(np.mean(_kl_last(p, q)))


AMP_SCALES = ("raw", "unit")


def amplitude_scale(n: int, mode: str) -> float:
    """Multiplier applied to |DFT| before the softmax.

    ``raw`` keeps the unnormalized transform; ``unit`` uses the one-sided
    amplitude 2|X_k|/n, so a sinusoid of amplitude a scores a regardless of
    the signal length.
    """
    if mode == "raw":
        return 1.0
    if mode == "unit":
        return 2.0 / n
    raise ValueError(f"unknown amplitude scale {mode!r}; expected one of {AMP_SCALES}")


def period_kl_and_grads(
    x_t: np.ndarray,
    x_s: np.ndarray,
    tau: float,
    axis: int = 0,
    teacher_grad: bool = False,
    amp_scale: str = "raw",
) -> tuple[float, np.ndarray | None, np.ndarray]:
    """KL between period distributions of ``x_t`` and ``x_s`` with adjoints.

    Returns ``(loss, grad_t, grad_s)``; ``grad_t`` is None unless
    ``teacher_grad`` is set (feature-level matching, where the teacher side
    passes through a trainable regressor).
    """
    if x_t.shape != x_s.shape:
        raise ValueError(f"shape mismatch: {x_t.shape} vs {x_s.shape}")
    if not tau > 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    n = x_s.shape[axis]
    # amplitude is linear in the signal, so scaling the inputs scales |X_k|
    k = amplitude_scale(n, amp_scale)
    amp_s, bins_s = _amplitude_fwd(k * np.asarray(x_s, dtype=np.float64), axis)
    amp_t, bins_t = _amplitude_fwd(k * np.asarray(x_t, dtype=np.float64), axis)
    q_s = _softmax_last(amp_s, tau)
    q_t = _softmax_last(amp_t, tau)
    per_pos = _kl_last(q_t, q_s)
    count = per_pos.size
    loss = float(per_pos.mean())

    # d/dq_s of p*(log p - log max(q, eps)), then softmax adjoint
    gq_s = np.where(q_s > LOG_EPS, -q_t / np.maximum(q_s, LOG_EPS), 0.0) / count
    ga_s = q_s * (gq_s - np.sum(q_s * gq_s, axis=-1, keepdims=True)) / tau
    grad_s = k * np.moveaxis(_amplitude_bwd(ga_s, bins_s, amp_s, n), -1, axis)

    grad_t = None
    if teacher_grad:
        lq_s = np.log(np.maximum(q_s, LOG_EPS))
        gq_t = np.where(q_t > LOG_EPS, np.log(np.maximum(q_t, LOG_EPS)) + 1.0, np.log(LOG_EPS)) - lq_s
        gq_t = gq_t / count
        ga_t = q_t * (gq_t - np.sum(q_t * gq_t, axis=-1, keepdims=True)) / tau
        grad_t = k * np.moveaxis(_amplitude_bwd(ga_t, bins_t, amp_t, n), -1, axis)
    return loss, grad_t, grad_s


def period_loss_grad(
    y_s: np.ndarray, q_t: PeriodDistribution, tau: float
) -> tuple[float, np.ndarray]:
    """KL(q_t || softmax(|DFT(y_s)| / tau)) and its gradient w.r.t. ``y_s``."""
    axis = q_t.axis
    y_s = np.asarray(y_s, dtype=np.float64)
    n = y_s.shape[axis]
    expected = list(y_s.shape)
    expected[axis] = n // 2
    if list(q_t.q.shape) != expected:
        raise ValueError(f"q_t shape {q_t.q.shape} does not fit signal shape {y_s.shape}")
    amp_s, bins_s = _amplitude_fwd(y_s, axis)
    q_s = _softmax_last(amp_s, tau)
    p = np.moveaxis(q_t.q, axis, -1)
    per_pos = _kl_last(p, q_s)
    count = per_pos.size
    gq = np.where(q_s > LOG_EPS, -p / np.maximum(q_s, LOG_EPS), 0.0) / count
    ga = q_s * (gq - np.sum(q_s * gq, axis=-1, keepdims=True)) / tau
    grad = np.moveaxis(_amplitude_bwd(ga, bins_s, amp_s, n), -1, axis)
    return float(per_pos.mean()), grad
