"""Channel-independent decomposition MLP student with hand-written adjoints."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import _kernels
from .dataio import DataError

NORM_EPS = 1e-5
REVIN_EPS = 1e-10
NORM_MODES = ("non-stationary", "revin")
CKPT_MAGIC = b"TDSTU1\n"
TENSOR_FIELDS = (
    "W1_seasonal",
    "b1_seasonal",
    "W1_trend",
    "b1_trend",
    "W2",
    "b2",
    "revin_gamma",
    "revin_beta",
)


@dataclass
class StudentParams:
    W1_seasonal: np.ndarray
    b1_seasonal: np.ndarray
    W1_trend: np.ndarray
    b1_trend: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    revin_gamma: np.ndarray | None = None
    revin_beta: np.ndarray | None = None
    kernel: int = 25
    norm_mode: str = "non-stationary"
    seed: int = 0

    @property
    def T(self) -> int:
        return self.W1_seasonal.shape[1]

    @property
    def S(self) -> int:
        return self.W2.shape[0]

    @property
    def D(self) -> int:
        return self.W2.shape[1]

    def named_tensors(self) -> dict[str, np.ndarray]:
        """Parameter tensors in storage order; values are the live arrays."""
        out = {}
        for name in TENSOR_FIELDS:
            arr = getattr(self, name)
            if arr is not None:
                out[name] = arr
        return out

    def copy(self) -> "StudentParams":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        for name in TENSOR_FIELDS:
            if kw[name] is not None:
                kw[name] = kw[name].copy()
        return StudentParams(**kw)


@dataclass
class StudentOutput:
    y_hat: np.ndarray  # [B, S, C]
    h: np.ndarray  # [B, D, C]
    norm_stats: tuple  # (mean, std) each [B, C]
    cache: dict = field(default=None, repr=False)


def init_params(
    T: int,
    S: int,
    D: int,
    norm_mode: str = "non-stationary",
    seed: int = 0,
    n_channels: int | None = None,
    kernel: int = 25,
) -> StudentParams:
    if min(T, S, D) < 1:
        raise ValueError(f"T, S, D must be >= 1, got {(T, S, D)}")
    if norm_mode not in NORM_MODES:
        raise ValueError(f"unknown norm_mode {norm_mode!r}")
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"decomposition kernel must be a positive odd integer, got {kernel}")
    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    p = StudentParams(
        W1_seasonal=uniform((D, T), T),
        b1_seasonal=np.zeros(D),
        W1_trend=uniform((D, T), T),
        b1_trend=np.zeros(D),
        W2=uniform((S, D), D),
        b2=np.zeros(S),
        kernel=kernel,
        norm_mode=norm_mode,
        seed=seed,
    )
    if norm_mode == "revin":
        if n_channels is None:
            raise ValueError("revin mode needs n_channels")
        p.revin_gamma = np.ones(n_channels)
        p.revin_beta = np.zeros(n_channels)
    return p


def param_count(p: StudentParams) -> int:
    return int(sum(a.size for a in p.named_tensors().values()))


def decompose(x: np.ndarray, kernel: int = 25, axis: int = 0):
    """Split ``x`` into (seasonal, trend) with a replicate-padded moving average."""
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be odd and >= 1, got {kernel}")
    x = np.asarray(x, dtype=np.float64)
    moved = np.moveaxis(x, axis, -1)
    trend = np.moveaxis(_kernels.moving_average(moved, kernel), -1, axis)
    return x - trend, trend


def _moving_average_adjoint(g: np.ndarray, kernel: int) -> np.ndarray:
    """Transpose of the replicate-padded moving average along the last axis."""
    pad = (kernel - 1) // 2
    if pad == 0:
        return g.copy()
    n = g.shape[-1]
    # scatter each output's weight over its padded window via cumsum
    gp = np.zeros(g.shape[:-1] + (n + 2 * pad + 1,))
    gp[..., :n] += g / kernel
    gp[..., kernel : kernel + n] -= g / kernel
    gp = np.cumsum(gp, axis=-1)[..., : n + 2 * pad]
    out = gp[..., pad : pad + n].copy()
    out[..., 0] += gp[..., :pad].sum(axis=-1)
    out[..., -1] += gp[..., pad + n :].sum(axis=-1)
    return out


def forward(p: StudentParams, X: np.ndarray, norm_mode: str | None = None, keep_cache: bool = False) -> StudentOutput:
    """Forecast ``X`` [B, T, C] -> y_hat [B, S, C] and features h [B, D, C]."""
    mode = norm_mode or p.norm_mode
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[1] != p.T:
        raise ValueError(f"expected X of shape [B, {p.T}, C], got {X.shape}")
    xr = np.swapaxes(X, 1, 2)  # [B, C, T]
    mu = xr.mean(axis=-1, keepdims=True)
    sd = xr.std(axis=-1, keepdims=True) + NORM_EPS
    z = (xr - mu) / sd
    if mode == "revin":
        if p.revin_gamma is None or p.revin_gamma.shape[0] != X.shape[2]:
            raise ValueError("revin parameters missing or sized for a different channel count")
        g = p.revin_gamma[None, :, None]
        xt = g * z + p.revin_beta[None, :, None]
    else:
        xt = z
    trend = _kernels.moving_average(xt, p.kernel)
    seas = xt - trend
    zs = seas @ p.W1_seasonal.T + p.b1_seasonal
    zt = trend @ p.W1_trend.T + p.b1_trend
    h = np.maximum(zs, 0.0) + np.maximum(zt, 0.0)  # [B, C, D]
    yn = h @ p.W2.T + p.b2  # [B, C, S]
    if mode == "revin":
        yu = (yn - p.revin_beta[None, :, None]) / (g + REVIN_EPS)
    else:
        yu = yn
    y = yu * sd + mu
    cache = None
    if keep_cache:
        cache = dict(mode=mode, sd=sd, z=z, seas=seas, trend=trend, zs=zs, zt=zt, h=h, yu=yu)
    return StudentOutput(
        y_hat=np.swapaxes(y, 1, 2),
        h=np.swapaxes(h, 1, 2),
        norm_stats=(mu[..., 0], sd[..., 0]),
        cache=cache,
    )


def backward(p: StudentParams, out: StudentOutput, d_y_hat: np.ndarray, d_h: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Parameter gradients given adjoints of ``y_hat`` [B,S,C] and ``h`` [B,D,C]."""
    c = out.cache
    if c is None:
        raise ValueError("forward was run without keep_cache=True")
    grads = {}
    dyu = np.swapaxes(d_y_hat, 1, 2) * c["sd"]  # [B, C, S]
    if c["mode"] == "revin":
        g = p.revin_gamma[None, :, None] + REVIN_EPS
        dyn = dyu / g
        d_beta = -dyn.sum(axis=(0, 2))
        d_gamma = -(dyn * c["yu"]).sum(axis=(0, 2))
    else:
        dyn = dyu
    grads["W2"] = dyn.reshape(-1, dyn.shape[-1]).T @ c["h"].reshape(-1, p.D)
    grads["b2"] = dyn.sum(axis=(0, 1))
    dh = dyn @ p.W2
    if d_h is not None:
        dh = dh + np.swapaxes(d_h, 1, 2)
    dzs = dh * (c["zs"] > 0)
    dzt = dh * (c["zt"] > 0)
    grads["W1_seasonal"] = dzs.reshape(-1, p.D).T @ c["seas"].reshape(-1, p.T)
    grads["b1_seasonal"] = dzs.sum(axis=(0, 1))
    grads["W1_trend"] = dzt.reshape(-1, p.D).T @ c["trend"].reshape(-1, p.T)
    grads["b1_trend"] = dzt.sum(axis=(0, 1))
    if c["mode"] == "revin":
        d_seas = dzs @ p.W1_seasonal
        d_trend = dzt @ p.W1_trend
        dxt = d_seas + _moving_average_adjoint(d_trend - d_seas, p.kernel)
        grads["revin_gamma"] = d_gamma + (dxt * c["z"]).sum(axis=(0, 2))
        grads["revin_beta"] = d_beta + dxt.sum(axis=(0, 2))
    return {k: grads[k] for k in TENSOR_FIELDS if k in grads}


# ---------------------------------------------------------------- checkpoint


def save_checkpoint(path: str | Path, p: StudentParams, n_channels: int, extra: dict | None = None) -> None:
    meta = {
        "T": p.T,
        "S": p.S,
        "D": p.D,
        "C": int(n_channels),
        "norm_mode": p.norm_mode,
        "kernel": p.kernel,
        "seed": p.seed,
        "tensors": [[k, list(v.shape)] for k, v in p.named_tensors().items()],
    }
    if extra:
        meta["extra"] = extra
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for arr in p.named_tensors().values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[StudentParams, dict]:
    raw = Path(path).read_bytes()
    if not raw.startswith(CKPT_MAGIC):
        raise DataError(f"{path}: not a student checkpoint (bad magic)")
    off = len(CKPT_MAGIC)
    if len(raw) < off + 4:
        raise DataError(f"{path}: truncated header")
    (n,) = struct.unpack_from("<I", raw, off)
    off += 4
    if len(raw) < off + n:
        raise DataError(f"{path}: truncated metadata ({len(raw) - off} of {n} bytes)")
    try:
        meta = json.loads(raw[off : off + n].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: unreadable metadata: {exc}") from None
    off += n
    expected = sum(int(np.prod(shape)) for _, shape in meta["tensors"]) * 8
    if len(raw) - off != expected:
        raise DataError(f"{path}: payload has {len(raw) - off} bytes, expected {expected}")
    tensors = {}
    for name, shape in meta["tensors"]:
        size = int(np.prod(shape))
        tensors[name] = np.frombuffer(raw, dtype="<f8", count=size, offset=off).reshape(shape).astype(np.float64)
        off += size * 8
    p = StudentParams(**tensors, kernel=meta["kernel"], norm_mode=meta["norm_mode"], seed=meta["seed"])
    return p, meta
