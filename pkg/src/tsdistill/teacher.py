"""Frozen teachers: file-backed artifacts, a ridge teacher, an oracle-noise
teacher, and the affine regressor that lifts teacher features to width D."""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import DataError

ARTIFACT_MAGIC = b"TDTEACH1"


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TeacherOutputs:
    """Per-window teacher predictions [N, S, C] and features [N, D_t, C]."""

    y_hat_t: np.ndarray
    h_t: np.ndarray

    def __post_init__(self):
        y, h = _readonly(self.y_hat_t), _readonly(self.h_t)
        if y.ndim != 3 or h.ndim != 3 or y.shape[0] != h.shape[0] or y.shape[2] != h.shape[2]:
            raise ValueError(f"inconsistent teacher shapes {y.shape} / {h.shape}")
        if h.shape[1] < 1:
            raise ValueError("teacher feature width must be >= 1")
        if not (np.isfinite(y).all() and np.isfinite(h).all()):
            raise ValueError("teacher outputs contain non-finite values")
        object.__setattr__(self, "y_hat_t", y)
        object.__setattr__(self, "h_t", h)

    @property
    def n_windows(self) -> int:
        return self.y_hat_t.shape[0]

    @property
    def D_t(self) -> int:
        return self.h_t.shape[1]

    def take(self, idx) -> "TeacherOutputs":
        idx = np.asarray(idx)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_windows):
            raise IndexError(f"window index out of range [0, {self.n_windows})")
        return TeacherOutputs(self.y_hat_t[idx], self.h_t[idx])


# ------------------------------------------------------------------ artifact


def _alignment_checksum(split_id: str, T: int, S: int, N: int) -> int:
    return zlib.crc32(f"{split_id}:{T}:{S}:{N}".encode("utf-8"))


def write_teacher_artifact(path: str | Path, outputs: TeacherOutputs, split_id: str, T: int) -> None:
    N, S, C = outputs.y_hat_t.shape
    header = {
        "version": 1,
        "split_id": split_id,
        "T": int(T),
        "S": int(S),
        "C": int(C),
        "D_t": int(outputs.D_t),
        "N": int(N),
        "dtype": "f32",
        "layout": "sample-major",
        "checksum": _alignment_checksum(split_id, T, S, N),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(ARTIFACT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(outputs.y_hat_t, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(outputs.h_t, dtype="<f4").tobytes())


class FileTeacher:
    """Teacher served from a TDT1 artifact for one (split, T, S) alignment."""

    def __init__(self, header: dict, outputs: TeacherOutputs):
        self.header = header
        self.outputs = outputs

    @property
    def split_id(self) -> str:
        return self.header["split_id"]

    def query(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        if not 0 <= i < self.outputs.n_windows:
            raise IndexError(f"window {i} outside declared range [0, {self.outputs.n_windows})")
        return self.outputs.y_hat_t[i], self.outputs.h_t[i]

    def check_alignment(self, split_id: str, T: int, S: int, N: int) -> None:
        h = self.header
        got = (h["split_id"], h["T"], h["S"], h["N"])
        if got != (split_id, T, S, N):
            raise DataError(f"teacher artifact aligned to {got}, batch expects {(split_id, T, S, N)}")


def load_teacher_artifact(path: str | Path) -> FileTeacher:
    raw = Path(path).read_bytes()
    if raw[:8] != ARTIFACT_MAGIC:
        raise DataError(f"{path}: bad magic {raw[:8]!r}, expected {ARTIFACT_MAGIC!r}")
    if len(raw) < 12:
        raise DataError(f"{path}: truncated header")
    (hlen,) = struct.unpack_from("<I", raw, 8)
    if len(raw) < 12 + hlen:
        raise DataError(f"{path}: header declares {hlen} bytes, file has {len(raw) - 12}")
    try:
        header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: unreadable header: {exc}") from None
    if header.get("dtype") != "f32":
        raise DataError(f"{path}: dtype {header.get('dtype')!r} unsupported, expected 'f32'")
    if header.get("layout") != "sample-major" or header.get("version") != 1:
        raise DataError(f"{path}: unsupported layout/version")
    try:
        N, S, C, D_t, T = (int(header[k]) for k in ("N", "S", "C", "D_t", "T"))
        split_id = header["split_id"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: header missing field: {exc}") from None
    if header.get("checksum") != _alignment_checksum(split_id, T, S, N):
        raise DataError(f"{path}: alignment checksum mismatch")
    n_pred, n_feat = N * S * C, N * D_t * C
    expected = 12 + hlen + 4 * (n_pred + n_feat)
    if len(raw) != expected:
        raise DataError(f"{path}: expected {expected} bytes, found {len(raw)}")
    off = 12 + hlen
    y = np.frombuffer(raw, dtype="<f4", count=n_pred, offset=off).reshape(N, S, C)
    h = np.frombuffer(raw, dtype="<f4", count=n_feat, offset=off + 4 * n_pred).reshape(N, D_t, C)
    return FileTeacher(header, TeacherOutputs(y, h))


# ------------------------------------------------------------ stand-in teachers


def oracle_noise_teacher(Y: np.ndarray, sigma: float, D_t: int, seed: int = 0) -> TeacherOutputs:
    """Ground truth plus gaussian noise; features are a fixed random projection."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    Y = np.asarray(Y, dtype=np.float64)
    rng = np.random.default_rng(seed)
    S = Y.shape[1]
    P = rng.standard_normal((D_t, S)) / np.sqrt(S)
    y_hat = Y + rng.normal(0.0, sigma, size=Y.shape) if sigma > 0 else Y.copy()
    h = np.matmul(P, y_hat)
    return TeacherOutputs(y_hat, h)


class LinearTeacher:
    """Ridge map A [S x T] shared across channels, fitted in closed form."""

    def __init__(self, A: np.ndarray, D_t: int, seed: int = 0):
        self.A = _readonly(A)
        S, T = self.A.shape
        if not 1 <= D_t <= T:
            raise ValueError(f"D_t must lie in [1, T={T}], got {D_t}")
        rng = np.random.default_rng(seed)
        self.P = _readonly(rng.standard_normal((D_t, D_t)) / np.sqrt(D_t))
        self.D_t = D_t

    def predict(self, X: np.ndarray) -> TeacherOutputs:
        X = np.asarray(X, dtype=np.float64)
        y = np.matmul(self.A, X)
        h = np.matmul(self.P, X[:, -self.D_t :, :])
        return TeacherOutputs(y, h)


def fit_ridge(X: np.ndarray, Y: np.ndarray, lam: float) -> np.ndarray:
    """Solve min_A sum ||A x - y||^2 + lam ||A||^2 over channel-flattened windows."""
    if not lam > 0:
        raise ValueError("ridge strength must be > 0")
    T, S = X.shape[1], Y.shape[1]
    Xf = np.swapaxes(X, 1, 2).reshape(-1, T)
    Yf = np.swapaxes(Y, 1, 2).reshape(-1, S)
    gram = Xf.T @ Xf + lam * np.eye(T)
    rhs = Xf.T @ Yf
    return np.linalg.solve(gram, rhs).T


def train_linear_teacher(X: np.ndarray, Y: np.ndarray, lam: float = 1.0, D_t: int = 64, seed: int = 0) -> LinearTeacher:
    return LinearTeacher(fit_ridge(X, Y, lam), min(D_t, X.shape[1]), seed)


# ----------------------------------------------------------------- regressor


@dataclass
class Regressor:
    W_r: np.ndarray  # [D, D_t]
    b_r: np.ndarray  # [D]

    @classmethod
    def init(cls, D: int, D_t: int, seed: int = 0) -> "Regressor":
        rng = np.random.default_rng(seed)
        bound = 1.0 / np.sqrt(D_t)
        return cls(rng.uniform(-bound, bound, size=(D, D_t)), np.zeros(D))

    def named_tensors(self) -> dict[str, np.ndarray]:
        return {"W_r": self.W_r, "b_r": self.b_r}

    def copy(self) -> "Regressor":
        return Regressor(self.W_r.copy(), self.b_r.copy())


def regressor_apply(r: Regressor, h_t: np.ndarray) -> np.ndarray:
    """Map teacher features [B, D_t, C] to [B, D, C] with the same affine map per channel."""
    if h_t.ndim != 3 or h_t.shape[1] != r.W_r.shape[1]:
        raise ValueError(f"expected h_t of shape [B, {r.W_r.shape[1]}, C], got {h_t.shape}")
    return np.matmul(r.W_r, h_t) + r.b_r[None, :, None]


def regressor_backward(h_t: np.ndarray, d_out: np.ndarray) -> dict[str, np.ndarray]:
    return {
        "W_r": np.tensordot(d_out, h_t, axes=([0, 2], [0, 2])),
        "b_r": d_out.sum(axis=(0, 2)),
    }
