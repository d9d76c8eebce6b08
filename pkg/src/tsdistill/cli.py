"""Command-line entry point: ``tsdistill <command> [options]``.

Commands share one output directory. ``prepare`` caches the series and
writes ``manifest.json``; the other commands read it back, so window
geometry and split boundaries are fixed once per directory.

Exit codes: 0 success, 1 usage, 2 data error, 3 contract violation.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__, dataio
from . import evaluate as ev
from . import student as st
from .config import RunConfig, build_run_config, default_seed, read_config_file
from .dataio import DataError
from .teacher import (
    TeacherOutputs,
    load_teacher_artifact,
    oracle_noise_teacher,
    train_linear_teacher,
    write_teacher_artifact,
)
from .theorems import TOL, run_period_suite, run_scale_suite

log = logging.getLogger("tsdistill")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONTRACT = 0, 1, 2, 3
GRADCHECK_LIMIT = 1e-4
MANIFEST = "manifest.json"
SERIES_CACHE = "series.npy"
LOCK_NAME = ".tsdistill.lock"


class UsageError(Exception):
    pass


class ContractError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


class _Help(argparse.HelpFormatter):
    """Append the default to every option that has a concrete one."""

    def _get_help_string(self, action):
        text = action.help or ""
        if action.default in (None, argparse.SUPPRESS) or "%(default)" in text or "(default:" in text:
            return text
        if not action.option_strings or action.nargs == 0:
            return text
        return text + " (default: %(default)s)"


# ------------------------------------------------------------------ helpers


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, doc) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


@contextlib.contextmanager
def _locked(out: Path):
    """Exclusive claim on an output directory for the lifetime of a command."""
    out.mkdir(parents=True, exist_ok=True)
    lock = out / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise DataError(f"{out} is locked by another command (remove {lock} if stale)") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield out
    finally:
        with contextlib.suppress(FileNotFoundError):
            lock.unlink()


def _run_config(args, extra: dict | None = None) -> RunConfig:
    """Defaults < ``--config`` file < flags given on the command line."""
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    names = {f.name for f in fields(RunConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in names and v is not None}
    overrides.update(extra or {})
    try:
        return build_run_config(file_values, overrides)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _load_prepared(out: Path) -> tuple[dict, dataio.SeriesDataset]:
    mpath = out / MANIFEST
    if not mpath.is_file():
        raise DataError(f"{mpath} not found; run 'prepare' first")
    manifest = json.loads(mpath.read_text(encoding="utf-8"))
    cache = out / manifest["cache"]
    if not cache.is_file():
        raise DataError(f"series cache {cache} is missing")
    if _sha256(cache) != manifest["cache_sha256"]:
        raise DataError(f"series cache {cache} does not match the manifest checksum")
    values = np.load(cache, allow_pickle=False)
    ds = dataio.SeriesDataset(values, tuple(manifest["channel_names"]))
    sp = manifest["split"]
    ds = dataio.standardize(dataio.split_at(ds, sp["train_end"], sp["val_end"]))
    return manifest, ds


def _split_id(manifest: dict, split: str) -> str:
    # tie artifacts to the exact cached series, not just the split name
    return f"{split}@{manifest['cache_sha256'][:16]}"


def _teacher_path(out: Path, split: str) -> Path:
    return out / f"teacher_{split}.tdt1"


def _aligned_teacher(path: Path, manifest: dict, split: str, n: int) -> TeacherOutputs:
    if not path.is_file():
        raise DataError(f"teacher artifact {path} not found; run 'train-teacher' first")
    ft = load_teacher_artifact(path)
    ft.check_alignment(_split_id(manifest, split), manifest["T"], manifest["S"], n)
    return ft.outputs


def _load_student(out: Path, name: str) -> tuple[st.StudentParams, dict]:
    path = out / f"{name}.tdstu1"
    if not path.is_file():
        raise DataError(f"checkpoint {path} not found; run 'distill' first")
    return st.load_checkpoint(path)


def _parse_synthetic(spec: str) -> dict:
    """``periods=24,96;noise=0.3;trend=0`` -> dict. Only ``periods`` is required."""
    out = {"periods": None, "noise": 0.3, "trend": 0.0}
    for item in filter(None, (s.strip() for s in spec.split(";"))):
        if "=" not in item:
            raise UsageError(f"bad synthetic item {item!r}; expected key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        try:
            if key == "periods":
                out["periods"] = [float(p) for p in value.split(",")]
            elif key in ("noise", "trend"):
                out[key] = float(value)
            else:
                raise UsageError(f"unknown synthetic key {key!r} (periods, noise, trend)")
        except ValueError:
            raise UsageError(f"bad value for {key}: {value!r}") from None
    if not out["periods"]:
        raise UsageError("synthetic spec needs periods=...")
    return out


def _int_if_whole(x: float):
    return int(x) if float(x).is_integer() else x


# ----------------------------------------------------------------- commands


def cmd_prepare(args) -> int:
    cfg = _run_config(args)
    out = Path(cfg.out)
    with _locked(out):
        if args.synthetic:
            syn = _parse_synthetic(args.synthetic)
            ds = dataio.synth_multiperiod(args.length, args.channels, syn["periods"], syn["trend"], syn["noise"], cfg.seed)
            source = {
                "kind": "synthetic",
                "periods": [_int_if_whole(p) for p in syn["periods"]],
                "length": args.length,
                "channels": args.channels,
                "noise_std": syn["noise"],
                "trend_slope": syn["trend"],
                "seed": cfg.seed,
            }
        else:
            if not cfg.data:
                raise UsageError("give --data FILE or --synthetic SPEC")
            path = Path(cfg.data)
            ds = dataio.load_csv(path)
            source = {"kind": "csv", "path": str(path.resolve()), "sha256": _sha256(path)}

        if cfg.split == "ett":
            fitted = dataio.split_ett(ds, args.steps_per_hour)
        elif cfg.split == "generic":
            fitted = dataio.split_standard(ds, cfg.ratios)
        else:
            raise UsageError(f"unknown split convention {cfg.split!r} (generic, ett)")
        std = dataio.standardize(fitted)
        counts = {s: len(dataio.SplitWindows(std, s, cfg.T, cfg.S)) for s in dataio.SPLITS}

        cache = out / SERIES_CACHE
        with open(cache, "wb") as fh:
            np.save(fh, np.ascontiguousarray(ds.values), allow_pickle=False)
        manifest = {
            "version": 1,
            "source": source,
            "cache": SERIES_CACHE,
            "cache_sha256": _sha256(cache),
            "channel_names": list(ds.channel_names),
            "length": ds.length,
            "T": cfg.T,
            "S": cfg.S,
            "split": {
                "convention": cfg.split,
                "ratios": list(cfg.ratios) if cfg.split == "generic" else None,
                "train_end": fitted.train_end,
                "val_end": fitted.val_end,
                "segment_lengths": {s: int(std.segment(s).shape[0]) for s in dataio.SPLITS},
            },
            "windows": counts,
            "stats": {"train_mean": fitted.train_mean.tolist(), "train_std": fitted.train_std.tolist()},
        }
        _write_json(out / MANIFEST, manifest)
    log.info("prepared %s: windows %s", out, counts)
    return EXIT_OK


def cmd_train_teacher(args) -> int:
    cfg = _run_config(args)
    out = Path(cfg.out)
    spec = cfg.teacher
    with _locked(out):
        manifest, ds = _load_prepared(out)
        T, S = manifest["T"], manifest["S"]
        windows = {s: dataio.SplitWindows(ds, s, T, S).all() for s in dataio.SPLITS}
        if spec == "linear":
            model = train_linear_teacher(windows["train"].X, windows["train"].Y, cfg.ridge, cfg.D_t, cfg.seed)
            outputs = {s: model.predict(w.X) for s, w in windows.items()}
            kind = {"kind": "linear", "ridge": cfg.ridge}
        elif spec.startswith("oracle"):
            try:
                sigma = float(spec.split(":", 1)[1]) if ":" in spec else cfg.teacher_sigma
            except ValueError:
                raise UsageError(f"bad oracle teacher spec {spec!r}; expected oracle:SIGMA") from None
            outputs = {
                s: oracle_noise_teacher(w.Y, sigma, cfg.D_t, cfg.seed + i)
                for i, (s, w) in enumerate(windows.items())
            }
            kind = {"kind": "oracle", "sigma": sigma}
        else:
            raise UsageError(f"unknown teacher {spec!r} (linear, oracle:SIGMA)")

        report = {"teacher": kind, "D_t": int(outputs["train"].D_t), "splits": {}}
        for s, w in windows.items():
            write_teacher_artifact(_teacher_path(out, s), outputs[s], _split_id(manifest, s), T)
            y_t = outputs[s].y_hat_t
            report["splits"][s] = {"n_windows": len(w.window_starts), "mse": ev.mse(y_t, w.Y), "mae": ev.mae(y_t, w.Y)}
        test = windows["test"]
        persistence = np.repeat(test.X[:, -1:, :], S, axis=1)
        report["persistence_test_mse"] = ev.mse(persistence, test.Y)
        report["beats_persistence"] = bool(report["splits"]["test"]["mse"] < report["persistence_test_mse"])
        _write_json(out / "teacher_report.json", report)
    log.info(
        "teacher %s: test mse %.6f (persistence %.6f)",
        kind["kind"],
        report["splits"]["test"]["mse"],
        report["persistence_test_mse"],
    )
    return EXIT_OK


def cmd_distill(args) -> int:
    from .trainer import train_distill

    out = Path(args.out or RunConfig.out)
    with _locked(out):
        manifest, ds = _load_prepared(out)
        cfg = _run_config(args, {"T": manifest["T"], "S": manifest["S"]})
        n_train = manifest["windows"]["train"]
        tpath = Path(args.teacher_artifact) if args.teacher_artifact else _teacher_path(out, "train")
        teacher = _aligned_teacher(tpath, manifest, "train", n_train)
        params, _, report = train_distill(ds, teacher, cfg)
        extra = {"run": args.name, "cache_sha256": manifest["cache_sha256"], "config": asdict(cfg)}
        st.save_checkpoint(out / f"{args.name}.tdstu1", params, ds.n_channels, extra)
        (out / f"{args.name}_train_report.json").write_text(report.to_json() + "\n", encoding="utf-8")
        _write_json(out / f"{args.name}_config.json", asdict(cfg))
    log.info("distilled %s: best epoch %d, test mse %.6f", args.name, report.best_epoch, report.test_mse)
    return EXIT_OK


def _errors(out: Path, manifest: dict, ds, split: str, name: str):
    params, _ = _load_student(out, name)
    batch = dataio.SplitWindows(ds, split, manifest["T"], manifest["S"]).all()
    if params.T != manifest["T"] or params.S != manifest["S"]:
        raise DataError(f"checkpoint {name} has T={params.T}, S={params.S}; manifest has {manifest['T']}, {manifest['S']}")
    return batch, ev.predict(params, batch.X), params


def _win_stats(out, manifest, ds, split, y_hat, batch, reference):
    """(e_student, e_teacher, e_reference, win_ratio, win_keep); missing pieces are None."""
    tpath = _teacher_path(out, split)
    if not tpath.is_file():
        return None, None, None, None, None
    teacher = _aligned_teacher(tpath, manifest, split, len(batch.window_starts))
    e_s = ev.per_sample_mse(y_hat, batch.Y, "student")
    e_t = ev.per_sample_mse(teacher.y_hat_t, batch.Y, "teacher")
    ratio = ev.win_ratio(e_s, e_t)
    e_r, keep = None, None
    if reference:
        _, y_ref, _ = _errors(out, manifest, ds, split, reference)
        e_r = ev.per_sample_mse(y_ref, batch.Y, reference)
        u_m = ev.win_set(e_r, e_t)
        keep = ev.win_keep(u_m, ev.win_set(e_s, e_t)) if u_m else None
    return e_s, e_t, e_r, ratio, keep


def cmd_eval(args) -> int:
    out = Path(args.out)
    with _locked(out):
        manifest, ds = _load_prepared(out)
        batch, y_hat, _ = _errors(out, manifest, ds, args.split, args.name)
        _, _, _, ratio, keep = _win_stats(out, manifest, ds, args.split, y_hat, batch, args.reference)
        doc = ev.metrics_summary(y_hat, batch.Y, win_ratio=ratio, win_keep=keep)
        doc["split"] = args.split
        _write_json(out / f"{args.name}_metrics.json", doc)
    log.info("%s on %s: mse %.6f mae %.6f", args.name, args.split, doc["mse"], doc["mae"])
    return EXIT_OK


def cmd_analyze(args) -> int:
    out = Path(args.out)
    with _locked(out):
        manifest, ds = _load_prepared(out)
        batch, y_hat, _ = _errors(out, manifest, ds, args.split, args.name)
        e_s, e_t, e_r, ratio, keep = _win_stats(out, manifest, ds, args.split, y_hat, batch, args.reference)
        if e_s is None:
            raise DataError(f"win analysis needs {_teacher_path(out, args.split)}")
        n = len(batch.window_starts)
        if not 0 <= args.window < n:
            raise UsageError(f"--window must lie in [0, {n})")
        with open(out / f"{args.name}_wins.csv", "w", newline="", encoding="utf-8") as fh:
            fh.write("window,e_student,e_teacher,student_wins")
            fh.write(",e_reference,reference_wins\n" if e_r is not None else "\n")
            for i in range(n):
                row = f"{i},{e_s.e[i]:.12g},{e_t.e[i]:.12g},{int(e_s.e[i] < e_t.e[i])}"
                if e_r is not None:
                    row += f",{e_r.e[i]:.12g},{int(e_r.e[i] < e_t.e[i])}"
                fh.write(row + "\n")
        M = args.M if args.M is not None else RunConfig.M
        w = args.window
        n_pyr = ev.export_pyramid(y_hat[w], batch.Y[w], M, out / f"{args.name}_pyramid.csv")
        n_spec = ev.export_spectrogram(y_hat[w], batch.Y[w], out / f"{args.name}_spectrogram.csv")
        doc = {
            "split": args.split,
            "n_windows": n,
            "win_ratio": ratio,
            "win_keep": keep,
            "reference": args.reference,
            "window": w,
            "M": M,
            "pyramid_rows": n_pyr,
            "spectrogram_rows": n_spec,
        }
        _write_json(out / f"{args.name}_analysis.json", doc)
    log.info("%s: win ratio %.4f%s", args.name, ratio, "" if keep is None else f", win keep {keep:.4f}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .config import DistillConfig
    from .trainer import full_loss_gradcheck

    cfg = DistillConfig(
        alpha=args.alpha,
        beta=args.beta,
        tau=args.tau,
        M=args.M,
        D=args.D,
        T=args.T,
        S=args.S,
        kernel=args.kernel,
        norm_mode=args.norm_mode,
        use_gt_pattern=args.gt_pattern,
        amp_scale=args.amp_scale,
    )
    seed = default_seed() if args.seed is None else args.seed
    worst, per = full_loss_gradcheck(args.B, args.T, args.S, args.C, args.D, args.D_t, cfg, seed, args.h, args.max_coords)
    out = Path(args.out)
    with _locked(out):
        doc = {"max_rel_error": worst, "per_tensor": per, "limit": GRADCHECK_LIMIT, "passed": bool(worst < GRADCHECK_LIMIT)}
        _write_json(out / "gradcheck.json", doc)
    log.info("gradcheck max relative error %.3e", worst)
    if not worst < GRADCHECK_LIMIT:
        raise ContractError(f"gradient check failed: {worst:.3e} >= {GRADCHECK_LIMIT}")
    return EXIT_OK


def cmd_verify_theorems(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    scale = run_scale_suite(args.trials, seed=seed)
    period = run_period_suite(args.trials, seed=seed + 1)
    ok = scale["min_margin"] >= -TOL and period["min_margin"] >= -TOL
    out = Path(args.out)
    with _locked(out):
        _write_json(out / "theorems.json", {"scale": scale, "period": period, "tolerance": TOL, "passed": bool(ok)})
    log.info("min margins: scale %.3e, period %.3e", scale["min_margin"], period["min_margin"])
    if not ok:
        raise ContractError("a mixup bound margin fell below tolerance")
    return EXIT_OK


# ------------------------------------------------------------------- parser


def _pos_int(v: str) -> int:
    n = int(v)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return n


def _ratios(v: str) -> tuple:
    try:
        return tuple(float(x) for x in v.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated fractions, got {v}") from None


def _cfg_flag(p, flag, field, type_, text):
    """Config-backed option: default None so file values survive, real default shown in help."""
    p.add_argument(flag, dest=field, type=type_, default=None, help=f"{text} (default: {getattr(RunConfig, field)})")


def _common(p, config: bool = True):
    p.add_argument("--out", default=None, help=f"output directory (default: {RunConfig.out})")
    if config:
        p.add_argument("--config", default=None, help="flat 'key = value' config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsdistill", description=__doc__.split("\n\n")[0], formatter_class=_Help)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="log verbosity")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    def add(name, fn, text):
        p = sub.add_parser(name, help=text, description=text, formatter_class=_Help)
        p.set_defaults(fn=fn)
        return p

    p = add("prepare", cmd_prepare, "load or synthesize a series, split it and write a window manifest")
    _common(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", dest="data", default=None, help="CSV file with a header row")
    src.add_argument("--synthetic", default=None, help="synthetic spec, e.g. 'periods=24,96;noise=0.3;trend=0'")
    p.add_argument("--length", type=_pos_int, default=4000, help="synthetic series length")
    p.add_argument("--channels", type=_pos_int, default=3, help="synthetic channel count")
    _cfg_flag(p, "--split", "split", str, "split convention: generic or ett")
    _cfg_flag(p, "--ratios", "ratios", _ratios, "train,val,test fractions for the generic split")
    p.add_argument("--steps-per-hour", type=_pos_int, default=1, help="sampling rate for the ett split")
    _cfg_flag(p, "--T", "T", _pos_int, "lookback length")
    _cfg_flag(p, "--S", "S", _pos_int, "horizon")
    _cfg_flag(p, "--seed", "seed", int, "seed; TD_SEED overrides the built-in default")

    p = add("train-teacher", cmd_train_teacher, "fit or materialize a teacher and write one artifact per split")
    _common(p)
    _cfg_flag(p, "--teacher", "teacher", str, "linear or oracle:SIGMA")
    _cfg_flag(p, "--D-t", "D_t", _pos_int, "teacher feature width")
    _cfg_flag(p, "--ridge", "ridge", float, "ridge strength of the linear teacher")
    _cfg_flag(p, "--seed", "seed", int, "seed; TD_SEED overrides the built-in default")

    p = add("distill", cmd_distill, "train a student against the train-split teacher artifact")
    _common(p)
    p.add_argument("--name", default="student", help="run name; prefixes every output file")
    p.add_argument("--teacher-artifact", default=None, help="teacher artifact (default: OUT/teacher_train.tdt1)")
    _cfg_flag(p, "--alpha", "alpha", float, "prediction-level weight")
    _cfg_flag(p, "--beta", "beta", float, "feature-level weight")
    _cfg_flag(p, "--tau", "tau", float, "softmax temperature of the period distributions")
    _cfg_flag(p, "--M", "M", int, "number of downsampling steps in the scale pyramid")
    _cfg_flag(p, "--D", "D", _pos_int, "student hidden width")
    _cfg_flag(p, "--kernel", "kernel", _pos_int, "moving-average kernel of the decomposition")
    _cfg_flag(p, "--norm-mode", "norm_mode", str, "non-stationary or revin")
    _cfg_flag(p, "--amp-scale", "amp_scale", str, "amplitude scaling inside the period loss: unit or raw")
    _cfg_flag(p, "--epochs", "epochs", _pos_int, "maximum epochs")
    _cfg_flag(p, "--batch-size", "batch_size", _pos_int, "batch size")
    _cfg_flag(p, "--lr", "lr", float, "Adam learning rate")
    _cfg_flag(p, "--patience", "patience", _pos_int, "early-stopping patience in epochs")
    _cfg_flag(p, "--seed", "seed", int, "seed; TD_SEED overrides the built-in default")
    flags = (
        ("--no-pred-level", "use_pred_level", False, "drop prediction-level distillation"),
        ("--no-feat-level", "use_feat_level", False, "drop feature-level distillation"),
        ("--no-multi-scale", "use_scale", False, "drop the multi-scale terms"),
        ("--no-multi-period", "use_period", False, "drop the multi-period terms"),
        ("--no-sup", "use_sup", False, "drop the supervised term"),
        ("--gt-pattern", "use_gt_pattern", True, "add scale and period matching against the ground truth"),
        ("--regressor-stop-grad", "regressor_stop_grad", True, "freeze the teacher-feature regressor"),
    )
    for flag, field, value, text in flags:
        p.add_argument(flag, dest=field, action="store_const", const=value, default=None, help=text)

    for name, fn, text in (
        ("eval", cmd_eval, "score a checkpoint and write its metrics JSON"),
        ("analyze", cmd_analyze, "win ratio / win keep plus pyramid and spectrogram CSVs"),
    ):
        p = add(name, fn, text)
        p.add_argument("--out", default=RunConfig.out, help="output directory")
        p.add_argument("--name", default="student", help="run name of the checkpoint")
        p.add_argument("--split", default="test", choices=dataio.SPLITS, help="split to score")
        p.add_argument("--reference", default=None, help="run name of a plain student, enables win keep")
        if name == "analyze":
            p.add_argument("--window", type=int, default=0, help="window index for the CSV exports")
            p.add_argument("--M", type=int, default=None, help=f"pyramid depth (default: {RunConfig.M})")

    p = add("gradcheck", cmd_gradcheck, "finite-difference check of the full objective")
    p.add_argument("--out", default=RunConfig.out, help="output directory")
    for flag, default in (("--B", 2), ("--T", 16), ("--S", 8), ("--C", 2), ("--D", 8), ("--D-t", 6)):
        p.add_argument(flag, dest=flag.strip("-").replace("-", "_"), type=_pos_int, default=default, help="problem size")
    p.add_argument("--M", type=int, default=2, help="pyramid depth")
    p.add_argument("--tau", type=float, default=0.5, help="temperature")
    p.add_argument("--alpha", type=float, default=1.0, help="prediction-level weight")
    p.add_argument("--beta", type=float, default=1.0, help="feature-level weight")
    p.add_argument("--kernel", type=_pos_int, default=RunConfig.kernel, help="decomposition kernel")
    p.add_argument("--norm-mode", default="non-stationary", choices=st.NORM_MODES, help="input normalization")
    p.add_argument("--amp-scale", default=RunConfig.amp_scale, choices=("unit", "raw"), help="period-loss amplitude scaling")
    p.add_argument("--gt-pattern", action="store_true", help="include the ground-truth pattern terms")
    p.add_argument("--h", type=float, default=1e-5, help="finite-difference step")
    p.add_argument("--max-coords", type=_pos_int, default=200, help="sampled coordinates per tensor")
    p.add_argument("--seed", type=int, default=None, help="seed (default: TD_SEED or 0)")

    p = add("verify-theorems", cmd_verify_theorems, "randomized check of both mixup bounds")
    p.add_argument("--out", default=RunConfig.out, help="output directory")
    p.add_argument("--trials", type=_pos_int, default=10000, help="random instances per suite")
    p.add_argument("--seed", type=int, default=None, help="seed (default: TD_SEED or 0)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"tsdistill: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"tsdistill: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ContractError, FloatingPointError) as exc:
        print(f"tsdistill: contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except ValueError as exc:
        # remaining ValueErrors come from invalid option values
        print(f"tsdistill: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
