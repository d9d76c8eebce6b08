"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Setting ``TSDISTILL_NO_NUMBA=1``
(or running without numba installed) selects the numpy implementations.
Both variants are always importable under explicit names so the benchmark
and the tests can compare them directly.
"""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("TSDISTILL_NO_NUMBA", "0") not in ("1", "true", "yes")
BACKEND = "numba" if USE_NUMBA else "numpy"


@lru_cache(maxsize=None)
def bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=None)
def twiddles(n: int) -> np.ndarray:
    """exp(-2 pi i k / n) for k < n/2; read-only, shared."""
    w = np.exp(-2j * np.pi * np.arange(max(n // 2, 1)) / n)
    w.setflags(write=False)
    return w


def fft_pow2_numpy(x: np.ndarray) -> np.ndarray:
    """Radix-2 decimation-in-time FFT along the last axis (length 2**k)."""
    n = x.shape[-1]
    lead = x.shape[:-1]
    out = np.asarray(x, dtype=np.complex128)[..., bit_reverse_permutation(n)]
    w = twiddles(n)
    half = 1
    while half < n:
        blocks = out.reshape(lead + (n // (2 * half), 2, half))
        even = blocks[..., 0, :]
        odd = blocks[..., 1, :] * w[:: n // (2 * half)][:half]
        out = np.concatenate([even + odd, even - odd], axis=-1).reshape(lead + (n,))
        half *= 2
    return out


def moving_average_numpy(x: np.ndarray, kernel: int) -> np.ndarray:
    """Centered moving average over the last axis with replicate padding."""
    pad = (kernel - 1) // 2
    if pad == 0:
        return x.copy()
    left = np.repeat(x[..., :1], pad, axis=-1)
    right = np.repeat(x[..., -1:], pad, axis=-1)
    padded = np.concatenate([left, x, right], axis=-1)
    csum = np.cumsum(padded, axis=-1)
    csum = np.concatenate([np.zeros(x.shape[:-1] + (1,)), csum], axis=-1)
    return (csum[..., kernel:] - csum[..., :-kernel]) / kernel


if _HAVE_NUMBA:

    @njit(cache=True)
    def _fft_pow2_rows(data, rev, w):  # pragma: no cover - jitted
        rows, n = data.shape
        out = np.empty_like(data)
        for r in range(rows):
            for i in range(n):
                out[r, i] = data[r, rev[i]]
            half = 1
            while half < n:
                step = n // (2 * half)
                for start in range(0, n, 2 * half):
                    for k in range(half):
                        t = w[k * step] * out[r, start + k + half]
                        u = out[r, start + k]
                        out[r, start + k] = u + t
                        out[r, start + k + half] = u - t
                half *= 2
        return out

    @njit(cache=True)
    def _moving_average_rows(x, kernel):  # pragma: no cover - jitted
        rows, n = x.shape
        pad = (kernel - 1) // 2
        out = np.empty_like(x)
        for r in range(rows):
            acc = 0.0
            for j in range(-pad, pad + 1):
                jj = min(max(j, 0), n - 1)
                acc += x[r, jj]
            out[r, 0] = acc / kernel
            for i in range(1, n):
                add = min(i + pad, n - 1)
                drop = min(max(i - pad - 1, 0), n - 1)
                acc += x[r, add] - x[r, drop]
                out[r, i] = acc / kernel
        return out


def fft_pow2_numba(x: np.ndarray) -> np.ndarray:
    if not _HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    n = x.shape[-1]
    flat = np.ascontiguousarray(x, dtype=np.complex128).reshape(-1, n)
    out = _fft_pow2_rows(flat, np.asarray(bit_reverse_permutation(n)), np.asarray(twiddles(n)))
    return out.reshape(x.shape)


def moving_average_numba(x: np.ndarray, kernel: int) -> np.ndarray:
    if not _HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    n = x.shape[-1]
    flat = np.ascontiguousarray(x, dtype=np.float64).reshape(-1, n)
    return _moving_average_rows(flat, kernel).reshape(x.shape)


if USE_NUMBA:
    fft_pow2 = fft_pow2_numba
    moving_average = moving_average_numba
else:
    fft_pow2 = fft_pow2_numpy
    moving_average = moving_average_numpy
