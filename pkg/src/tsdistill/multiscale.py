"""Stride-2 averaging pyramids and the multi-scale matching loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScalePyramid:
    levels: tuple
    axis: int = 0

    @property
    def M(self) -> int:
        return len(self.levels) - 1

    def lengths(self) -> list[int]:
        return [lvl.shape[self.axis] for lvl in self.levels]


def downsample(x: np.ndarray, axis: int = 0) -> np.ndarray:
    """Average adjacent pairs along ``axis``; an odd trailing element is dropped.

    Fixed kernel [1/2, 1/2], stride 2, no padding.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[axis]
    if n < 2:
        raise ValueError(f"downsample needs length >= 2, got {n}")
    x = np.moveaxis(x, axis, 0)
    half = n // 2
    out = 0.5 * (x[0 : 2 * half : 2] + x[1 : 2 * half : 2])
    return np.moveaxis(out, 0, axis)


def downsample_adjoint(g: np.ndarray, n: int, axis: int = 0) -> np.ndarray:
    """Transpose of :func:`downsample` mapping a length ``n // 2`` adjoint back to length ``n``."""
    g = np.moveaxis(np.asarray(g, dtype=np.float64), axis, 0)
    out = np.zeros((n,) + g.shape[1:])
    half = n // 2
    out[0 : 2 * half : 2] = 0.5 * g
    out[1 : 2 * half : 2] = 0.5 * g
    return np.moveaxis(out, 0, axis)


def build_pyramid(x: np.ndarray, M: int, axis: int = 0) -> ScalePyramid:
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[axis]
    if M < 0:
        raise ValueError("M must be non-negative")
    if n >> M < 1:
        raise ValueError(f"M={M} too large for length {n}: coarsest level would be empty")
    levels = [x]
    for _ in range(M):
        levels.append(downsample(levels[-1], axis))
    return ScalePyramid(tuple(levels), axis)


def scale_loss(p_t: ScalePyramid, p_s: ScalePyramid) -> float:
    if p_t.M != p_s.M:
        raise ValueError(f"pyramid depth mismatch: {p_t.M} vs {p_s.M}")
    total = 0.0
    for a, b in zip(p_t.levels, p_s.levels):
        if a.shape != b.shape:
            raise ValueError(f"level shape mismatch: {a.shape} vs {b.shape}")
        total += float(np.mean((a - b) ** 2))
    return total / (p_t.M + 1)


def scale_loss_and_grads(
    x_t: np.ndarray, x_s: np.ndarray, M: int, axis: int = 0
) -> tuple[float, np.ndarray, np.ndarray]:
    """Multi-scale loss between two base signals plus gradients for both.

    The loss is antisymmetric in its gradient: ``grad_t == -grad_s``.
    """
    if x_t.shape != x_s.shape:
        raise ValueError(f"shape mismatch: {x_t.shape} vs {x_s.shape}")
    # the pyramid is linear, so build it once on the difference
    diff = build_pyramid(np.asarray(x_s, dtype=np.float64) - x_t, M, axis)
    loss = 0.0
    grad = None
    for m in range(M, -1, -1):
        d = diff.levels[m]
        loss += float(np.mean(d * d))
        g = 2.0 * d / (d.size * (M + 1))
        grad = g if grad is None else g + downsample_adjoint(grad, d.shape[axis], axis)
    return loss / (M + 1), -grad, grad
