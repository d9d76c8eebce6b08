"""Run configuration: built-in defaults, flat ``key = value`` files, overrides."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

# Per-dataset rows of the reference experiment configuration:
# (D, norm, epochs, alpha, beta)
DATASET_PRESETS = {
    "ECL": (512, "non-stationary", 20, 0.1, 0.5),
    "ETTh1": (512, "non-stationary", 20, 2.0, 2.0),
    "ETTh2": (512, "non-stationary", 20, 2.0, 0.5),
    "ETTm1": (512, "non-stationary", 20, 2.0, 0.1),
    "ETTm2": (512, "non-stationary", 20, 2.0, 0.5),
    "Solar": (512, "non-stationary", 20, 0.1, 2.0),
    "Traffic": (1024, "revin", 10, 0.1, 0.1),
    "Weather": (512, "non-stationary", 20, 0.5, 2.0),
}


@dataclass(frozen=True)
class DistillConfig:
    alpha: float = 0.1
    beta: float = 0.5
    tau: float = 0.5
    M: int = 3
    use_scale: bool = True
    use_period: bool = True
    use_pred_level: bool = True
    use_feat_level: bool = True
    use_sup: bool = True
    use_gt_pattern: bool = False
    regressor_stop_grad: bool = False
    norm_mode: str = "non-stationary"
    D: int = 512
    T: int = 720
    S: int = 96
    kernel: int = 25
    amp_scale: str = "unit"

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if self.M < 0:
            raise ValueError("M must be >= 0")
        if self.norm_mode not in ("non-stationary", "revin"):
            raise ValueError(f"unknown norm mode {self.norm_mode!r}")
        if self.amp_scale not in ("raw", "unit"):
            raise ValueError(f"unknown amplitude scale {self.amp_scale!r}")


@dataclass(frozen=True)
class RunConfig(DistillConfig):
    data: str = ""
    split: str = "generic"
    ratios: tuple = (0.7, 0.1, 0.2)
    teacher: str = "linear"
    D_t: int = 64
    ridge: float = 1.0
    teacher_sigma: float = 0.2
    epochs: int = 20
    batch_size: int = 32
    lr: float = 0.01
    patience: int = 5
    seed: int = 0
    out: str = "runs"

    def distill_config(self) -> DistillConfig:
        names = {f.name for f in fields(DistillConfig)}
        return DistillConfig(**{k: v for k, v in asdict(self).items() if k in names})


def default_seed() -> int:
    return int(os.environ.get("TD_SEED", "0"))


def _coerce(value: str, current):
    if isinstance(current, bool):
        v = value.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    if isinstance(current, tuple):
        return tuple(float(x) for x in value.split(","))
    return value.strip()


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse flat UTF-8 ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_run_config(file_values: dict[str, str] | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults < config file < explicit overrides (already typed)."""
    cfg = RunConfig(seed=default_seed())
    known = {f.name for f in fields(RunConfig)}
    updates = {}
    for key, raw in (file_values or {}).items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        updates[key] = _coerce(raw, getattr(cfg, key))
    for key, value in (overrides or {}).items():
        if value is not None:
            updates[key] = value
    return replace(cfg, **updates)
