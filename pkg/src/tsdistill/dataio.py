"""CSV loading, synthetic series, splits, z-scoring and sliding windows."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

STD_EPS = 1e-8
SPLITS = ("train", "val", "test")


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


@dataclass(frozen=True)
class SeriesDataset:
    values: np.ndarray
    channel_names: tuple
    train_end: int | None = None
    val_end: int | None = None
    train_mean: np.ndarray | None = None
    train_std: np.ndarray | None = None
    standardized: bool = False

    def __post_init__(self):
        v = self.values
        if not (isinstance(v, np.ndarray) and v.dtype == np.float64 and not v.flags.writeable):
            v = _frozen(v)
        if v.ndim != 2:
            raise DataError(f"values must be [L, C], got shape {v.shape}")
        if not np.isfinite(v).all():
            raise DataError("values contain NaN or Inf")
        object.__setattr__(self, "values", v)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]

    @property
    def is_split(self) -> bool:
        return self.train_end is not None

    def segment(self, split_id: str) -> np.ndarray:
        if not self.is_split:
            raise DataError("dataset has no split; call split_standard first")
        bounds = {
            "train": (0, self.train_end),
            "val": (self.train_end, self.val_end),
            "test": (self.val_end, self.length),
        }
        if split_id not in bounds:
            raise DataError(f"unknown split {split_id!r}")
        lo, hi = bounds[split_id]
        return self.values[lo:hi]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def load_csv(path: str | Path) -> SeriesDataset:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    skip_date = bool(header) and header[0].lower() == "date"
    names = header[1:] if skip_date else header
    if not names:
        raise DataError(f"{path}: no value columns")
    data = []
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        cells = row[1:] if skip_date else row
        if len(cells) != len(names):
            raise DataError(f"{path}: row {r} has {len(cells)} values, expected {len(names)}")
        parsed = []
        for c, cell in enumerate(cells):
            col = names[c]
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {r}, column {col!r}: cannot parse {cell!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {r}, column {col!r}: non-finite value {cell!r}")
            parsed.append(v)
        data.append(parsed)
    if len(data) < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {len(data)}")
    return SeriesDataset(_frozen(data), tuple(names))


def split_standard(ds: SeriesDataset, ratios=(0.7, 0.1, 0.2)) -> SeriesDataset:
    """Chronological split; statistics are fitted on the training rows only."""
    if len(ratios) != 3 or any(not r > 0 for r in ratios):
        raise DataError(f"split ratios must be three positive fractions, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"split ratios must sum to 1, got {sum(ratios)}")
    n = ds.length
    train_end = int(math.floor(n * ratios[0]))
    val_end = train_end + int(math.floor(n * ratios[1]))
    return _with_bounds(ds, train_end, val_end)


def split_ett(ds: SeriesDataset, steps_per_hour: int = 1) -> SeriesDataset:
    """12/4/4 calendar-month convention (30-day months) at the given sampling rate."""
    month = 30 * 24 * steps_per_hour
    train_end, val_end = 12 * month, 16 * month
    if 20 * month > ds.length:
        raise DataError(f"ETT convention needs {20 * month} rows, dataset has {ds.length}")
    return _with_bounds(ds, train_end, val_end)


def split_at(ds: SeriesDataset, train_end: int, val_end: int) -> SeriesDataset:
    """Split at explicit boundaries, e.g. ones recorded in a manifest."""
    return _with_bounds(ds, int(train_end), int(val_end))


def _with_bounds(ds: SeriesDataset, train_end: int, val_end: int) -> SeriesDataset:
    if not 0 < train_end < val_end < ds.length:
        raise DataError(f"invalid split boundaries ({train_end}, {val_end}) for length {ds.length}")
    train = ds.values[:train_end]
    return replace(
        ds,
        train_end=train_end,
        val_end=val_end,
        train_mean=_frozen(train.mean(axis=0)),
        train_std=_frozen(np.maximum(train.std(axis=0), STD_EPS)),
    )


def standardize(ds: SeriesDataset) -> SeriesDataset:
    if not ds.is_split:
        raise DataError("fit a split before standardizing")
    if ds.standardized:
        raise DataError("dataset is already standardized")
    values = (ds.values - ds.train_mean) / (ds.train_std + STD_EPS)
    return replace(ds, values=_frozen(values), standardized=True)


def destandardize(values: np.ndarray, ds: SeriesDataset) -> np.ndarray:
    return np.asarray(values) * (ds.train_std + STD_EPS) + ds.train_mean


@dataclass(frozen=True)
class WindowBatch:
    X: np.ndarray
    Y: np.ndarray
    window_starts: np.ndarray


class SplitWindows:
    """All stride-1 windows of one split, gathered lazily by window index."""

    def __init__(self, ds: SeriesDataset, split_id: str, T: int, S: int):
        seg = ds.segment(split_id)
        n = seg.shape[0] - T - S + 1
        if n < 1:
            raise DataError(
                f"{split_id} segment has {seg.shape[0]} rows; need at least T+S={T + S}"
            )
        self.split_id = split_id
        self.T, self.S = T, S
        self.n_channels = seg.shape[1]
        # [n_pos, C, T+S] view without copying
        self._view = sliding_window_view(seg, T + S, axis=0)
        self.n_windows = n

    def __len__(self) -> int:
        return self.n_windows

    def gather(self, idx) -> WindowBatch:
        idx = np.asarray(idx, dtype=np.int64)
        w = self._view[idx]  # [B, C, T+S]
        X = np.ascontiguousarray(np.swapaxes(w[..., : self.T], 1, 2))
        Y = np.ascontiguousarray(np.swapaxes(w[..., self.T :], 1, 2))
        return WindowBatch(X, Y, idx)

    def all(self) -> WindowBatch:
        return self.gather(np.arange(self.n_windows))

    def batches(self, batch_size: int, order=None):
        order = np.arange(self.n_windows) if order is None else np.asarray(order)
        for lo in range(0, len(order), batch_size):
            yield self.gather(order[lo : lo + batch_size])


def make_windows(
    ds: SeriesDataset, split_id: str, T: int, S: int, batch_size: int = 32
) -> list[WindowBatch]:
    return list(SplitWindows(ds, split_id, T, S).batches(batch_size))


def synth_multiperiod(
    L_total: int,
    C: int,
    periods,
    trend_slope: float = 0.0,
    noise_std: float = 0.0,
    seed: int = 0,
) -> SeriesDataset:
    """Sum of sinusoids per channel plus a linear trend and gaussian noise."""
    periods = [float(p) for p in periods]
    if not periods:
        raise DataError("need at least one period")
    if L_total < 4 * max(periods):
        raise DataError(f"L_total={L_total} shorter than 4 x longest period {max(periods)}")
    rng = np.random.default_rng(seed)
    amps = rng.uniform(0.5, 1.5, size=(C, len(periods)))
    phases = rng.uniform(0.0, 2 * np.pi, size=(C, len(periods)))
    t = np.arange(L_total, dtype=np.float64)
    values = trend_slope * t[:, None] + np.zeros((L_total, C))
    for j, p in enumerate(periods):
        values += amps[:, j] * np.sin(2 * np.pi * t[:, None] / p + phases[:, j])
    if noise_std > 0:
        values += rng.normal(0.0, noise_std, size=(L_total, C))
    return SeriesDataset(_frozen(values), tuple(f"ch{c}" for c in range(C)))
