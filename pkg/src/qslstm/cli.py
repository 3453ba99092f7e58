"""Command-line benchmark harness.

Subcommands:

* ``run``          -- one (dataset x model) experiment; writes epochs.csv,
                      timings.csv, summary.json, dataset.csv to --out-dir
* ``table``        -- best-epoch comparison table from summary.json files
* ``convergence``  -- long-format (model, epoch, val_rmse) CSV from run dirs
* ``batch``        -- cross-product of datasets/models/seeds, optionally in
                      parallel worker processes

Model variants: ``classic`` (plain LSTM), ``qlstm-analytic`` (hybrid cell,
exact expectations), ``qlstm-shots`` (hybrid cell, sampled expectations,
--shots), ``slstm-shots`` (stochastically quantized cell, --shots).

Reproducibility contract: rerunning ``run`` with the same flags produces a
byte-identical epochs.csv.  Wall-clock numbers therefore live in
timings.csv and summary.json, never in epochs.csv.  The --seed flag drives
initialization; sampling noise uses a separate stream (override with
--noise-seed), so analytic-mode metrics depend on --seed alone.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from . import lstm_classic, qlstm
from .core_math import make_prng, spawn_prngs
from .datasets import KINDS, SignalConfig, build_benchmark_datasets, write_series_csv
from .quantum_sim import ExpectationMode
from .stochastic_quant import QuantConfig
from .train_eval import (ClassicModel, QuantumModel, RunRecord, StochasticModel,
                         TrainConfig, train_model)

MODEL_KINDS = ("classic", "qlstm-analytic", "qlstm-shots", "slstm-shots")

SUMMARY_FIELDS = ("model", "dataset", "seed", "config", "best_epoch",
                  "train_rmse", "train_r2", "val_rmse", "val_r2", "wall_seconds")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs; defaults match the benchmark setup."""

    dataset: str = "sine"
    model: str = "classic"
    hidden_dim: int = 5
    window_len: int = 4
    epochs: int = 100
    batch_size: int = 4
    lr: float = 0.01
    seed: int = 1
    shots: int = 1
    n_qubits: int = 4
    depth: int = 1
    n_points: int = 300
    train_fraction: float = 0.67
    noise_seed: int | None = None
    out_dir: str = "runs/run"

    def __post_init__(self):
        if self.dataset not in KINDS:
            raise ValueError(f"dataset: unknown kind {self.dataset!r} (choose from {', '.join(KINDS)})")
        if self.model not in MODEL_KINDS:
            raise ValueError(f"model: unknown variant {self.model!r} (choose from {', '.join(MODEL_KINDS)})")
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim: must be >= 1, got {self.hidden_dim}")
        if self.window_len < 1:
            raise ValueError(f"window_len: must be >= 1, got {self.window_len}")
        if self.epochs < 0:
            raise ValueError(f"epochs: must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size: must be >= 1, got {self.batch_size}")
        if self.lr <= 0:
            raise ValueError(f"lr: must be positive, got {self.lr}")
        if self.shots < 1:
            raise ValueError(f"shots: must be >= 1, got {self.shots}")
        if self.n_qubits < 2:
            raise ValueError(f"n_qubits: must be >= 2, got {self.n_qubits}")
        if self.depth < 1:
            raise ValueError(f"depth: must be >= 1, got {self.depth}")
        if self.n_points < self.window_len + 2:
            raise ValueError(f"n_points: need at least window_len + 2 points, got {self.n_points}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction: must lie in (0, 1), got {self.train_fraction}")


def build_model(cfg: ExperimentConfig, init_prng, noise_prng):
    """Instantiate the requested variant with its own parameter draws."""
    if cfg.model == "classic":
        params = lstm_classic.init_params(1, cfg.hidden_dim, 1, init_prng)
        return ClassicModel(params)
    if cfg.model == "slstm-shots":
        params = lstm_classic.init_params(1, cfg.hidden_dim, 1, init_prng)
        return StochasticModel(params, QuantConfig(shots=cfg.shots), noise_prng)
    params = qlstm.init_qlstm_params(1, cfg.hidden_dim, 1, cfg.n_qubits,
                                     cfg.depth, init_prng)
    if cfg.model == "qlstm-analytic":
        return QuantumModel(params, ExpectationMode.analytic())
    return QuantumModel(params, ExpectationMode.sampled(cfg.shots), noise_prng)


def run_benchmark(cfg: ExperimentConfig):
    """Build datasets and model, train, and return (record, train, val, raw).

    This is the file-free core of the ``run`` subcommand; tests and sweeps
    call it directly.
    """
    sig = SignalConfig(kind=cfg.dataset, n_points=cfg.n_points)
    train, val, raw = build_benchmark_datasets(sig, cfg.window_len, cfg.train_fraction)
    init_prng, default_noise = spawn_prngs(cfg.seed, 2)
    noise_prng = make_prng(cfg.noise_seed) if cfg.noise_seed is not None else default_noise
    model = build_model(cfg, init_prng, noise_prng)
    tc = TrainConfig(epochs=cfg.epochs, batch_size=cfg.batch_size, lr=cfg.lr)
    record = train_model(model, train, val, tc, seed=cfg.seed,
                         config_snapshot=asdict(cfg))
    return record, train, val, raw


def _fmt(x) -> str:
    return format(float(x), ".6g")


def write_epochs_csv(path: Path, record: RunRecord) -> None:
    """Deterministic per-epoch metrics (no timing columns by design)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["epoch", "train_rmse", "train_r2", "val_rmse", "val_r2"])
        for e in record.epochs:
            w.writerow([e.epoch, _fmt(e.train_rmse), _fmt(e.train_r2),
                        _fmt(e.val_rmse), _fmt(e.val_r2)])


def write_timings_csv(path: Path, record: RunRecord) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["epoch", "seconds"])
        for e in record.epochs:
            w.writerow([e.epoch, _fmt(e.seconds)])


def write_summary_json(path: Path, cfg: ExperimentConfig, record: RunRecord) -> None:
    best = record.best
    payload = {
        "model": cfg.model,
        "dataset": cfg.dataset,
        "seed": cfg.seed,
        "config": asdict(cfg),
        "best_epoch": record.best_epoch,
        "train_rmse": best.train_rmse,
        "train_r2": best.train_r2,
        "val_rmse": best.val_rmse,
        "val_r2": best.val_r2,
        "wall_seconds": record.wall_seconds,
    }
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def run_experiment(cfg: ExperimentConfig) -> int:
    """Train one configuration and write all artifacts to cfg.out_dir."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record, _train, _val, raw = run_benchmark(cfg)
    write_epochs_csv(out / "epochs.csv", record)
    write_timings_csv(out / "timings.csv", record)
    write_summary_json(out / "summary.json", cfg, record)
    write_series_csv(out / "dataset.csv", raw)
    if record.epochs:
        best = record.best
        print(f"{cfg.model} on {cfg.dataset} (seed {cfg.seed}): best epoch "
              f"{record.best_epoch}, val RMSE {_fmt(best.val_rmse)}, "
              f"val R2 {_fmt(best.val_r2)} -> {out}")
    else:
        print(f"{cfg.model} on {cfg.dataset} (seed {cfg.seed}): 0 epochs -> {out}")
    return 0


def load_summary(path: Path) -> dict:
    """Parse and shape-check one summary.json; raises ValueError if unusable."""
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as err:
        raise ValueError(f"{path}: unreadable summary ({err})") from err
    if not isinstance(data, dict):
        raise ValueError(f"{path}: summary is not a JSON object")
    missing = [k for k in SUMMARY_FIELDS if k not in data]
    if missing:
        raise ValueError(f"{path}: summary missing fields {', '.join(missing)}")
    return data


TABLE_COLUMNS = ("model", "dataset", "seed", "train_rmse", "train_r2",
                 "val_rmse", "val_r2", "wall_seconds", "flag")


def emit_table(summary_paths: list[Path], csv_out: Path | None = None) -> tuple[list[dict], int]:
    """Best-epoch comparison rows, sorted by model; returns (rows, n_skipped).

    Repeated (model, dataset) pairs are kept and flagged rather than
    deduplicated.
    """
    rows = []
    skipped = 0
    for path in summary_paths:
        try:
            s = load_summary(Path(path))
        except ValueError as err:
            print(f"warning: skipping {err}", file=sys.stderr)
            skipped += 1
            continue
        rows.append({
            "model": str(s["model"]), "dataset": str(s["dataset"]),
            "seed": s["seed"], "train_rmse": s["train_rmse"],
            "train_r2": s["train_r2"], "val_rmse": s["val_rmse"],
            "val_r2": s["val_r2"], "wall_seconds": s["wall_seconds"],
            "flag": "",
        })
    rows.sort(key=lambda r: (r["model"], r["dataset"], r["seed"]))
    seen = set()
    for r in rows:
        key = (r["model"], r["dataset"])
        if key in seen:
            r["flag"] = "duplicate"
            print(f"warning: duplicate entry for model {r['model']!r} on {r['dataset']!r}",
                  file=sys.stderr)
        seen.add(key)
    if csv_out is not None and rows:
        with open(csv_out, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(TABLE_COLUMNS)
            for r in rows:
                w.writerow([r["model"], r["dataset"], r["seed"],
                            _fmt(r["train_rmse"]), _fmt(r["train_r2"]),
                            _fmt(r["val_rmse"]), _fmt(r["val_r2"]),
                            _fmt(r["wall_seconds"]), r["flag"]])
    return rows, skipped


def format_table_text(rows: list[dict]) -> str:
    """Aligned text rendering of emit_table rows."""
    cells = [TABLE_COLUMNS]
    for r in rows:
        cells.append((r["model"], r["dataset"], str(r["seed"]),
                      _fmt(r["train_rmse"]), _fmt(r["train_r2"]),
                      _fmt(r["val_rmse"]), _fmt(r["val_r2"]),
                      _fmt(r["wall_seconds"]), r["flag"]))
    widths = [max(len(row[j]) for row in cells) for j in range(len(TABLE_COLUMNS))]
    lines = []
    for k, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _locate_epochs_csv(arg: Path) -> Path:
    return arg if arg.is_file() else arg / "epochs.csv"


def _run_label(epochs_path: Path) -> str:
    summary = epochs_path.parent / "summary.json"
    try:
        return str(load_summary(summary)["model"])
    except ValueError:
        return epochs_path.parent.name


def emit_convergence(run_paths: list[Path], out_path: Path) -> int:
    """Concatenate per-epoch validation RMSE across runs into one long CSV.

    Accepts run directories or epochs.csv paths.  The val_rmse strings are
    copied from the source files verbatim, so values stay bit-exact.
    Returns the number of runs skipped as malformed.
    """
    out_rows = []
    skipped = 0
    for arg in run_paths:
        path = _locate_epochs_csv(Path(arg))
        try:
            with open(path, encoding="utf-8", newline="") as f:
                reader = csv.reader(f)
                header = next(reader)
                e_col = header.index("epoch")
                v_col = header.index("val_rmse")
                rows = [(row[e_col], row[v_col]) for row in reader]
        except (OSError, ValueError, StopIteration) as err:
            print(f"warning: skipping {path}: {err}", file=sys.stderr)
            skipped += 1
            continue
        label = _run_label(path)
        out_rows.extend((label, epoch, val) for epoch, val in rows)
    if out_rows:
        with open(out_path, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["model", "epoch", "val_rmse"])
            w.writerows(out_rows)
    return skipped


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok != ""]


def _str_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _batch_worker(cfg_kwargs: dict) -> int:
    return run_experiment(ExperimentConfig(**cfg_kwargs))


def run_batch(datasets: list[str], models: list[str], seeds: list[int],
              out_root: Path, jobs: int, base: ExperimentConfig) -> int:
    """Cross-product sweep; every run gets its own subdirectory and streams."""
    if jobs < 1:
        raise ValueError(f"jobs: must be >= 1, got {jobs}")
    configs = []
    for ds in datasets:
        for model in models:
            for seed in seeds:
                name = f"{ds}_{model}_s{seed}"
                if model.endswith("-shots"):
                    name = f"{ds}_{model}{base.shots}_s{seed}"
                kwargs = asdict(base)
                kwargs.update(dataset=ds, model=model, seed=seed,
                              out_dir=str(out_root / name))
                configs.append(ExperimentConfig(**kwargs))
    if jobs == 1:
        codes = [run_experiment(cfg) for cfg in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(_batch_worker, [asdict(cfg) for cfg in configs]))
    return max(codes, default=0)


_DEFAULTS = ExperimentConfig()


def _add_run_flags(p: argparse.ArgumentParser, for_batch: bool = False) -> None:
    if not for_batch:
        p.add_argument("--dataset", default=_DEFAULTS.dataset, choices=KINDS)
        p.add_argument("--model", default=_DEFAULTS.model, choices=MODEL_KINDS)
        p.add_argument("--seed", type=int, default=_DEFAULTS.seed)
        p.add_argument("--out-dir", default=_DEFAULTS.out_dir,
                       help="directory for epochs.csv / timings.csv / summary.json / dataset.csv")
    p.add_argument("--hidden-dim", type=int, default=_DEFAULTS.hidden_dim)
    p.add_argument("--window-len", type=int, default=_DEFAULTS.window_len)
    p.add_argument("--epochs", type=int, default=_DEFAULTS.epochs)
    p.add_argument("--batch-size", type=int, default=_DEFAULTS.batch_size)
    p.add_argument("--lr", type=float, default=_DEFAULTS.lr)
    p.add_argument("--shots", type=int, default=_DEFAULTS.shots,
                   help="shot count for the *-shots model variants")
    p.add_argument("--n-qubits", type=int, default=_DEFAULTS.n_qubits)
    p.add_argument("--depth", type=int, default=_DEFAULTS.depth)
    p.add_argument("--n-points", type=int, default=_DEFAULTS.n_points)
    p.add_argument("--train-fraction", type=float, default=_DEFAULTS.train_fraction)
    p.add_argument("--noise-seed", type=int, default=None,
                   help="separate seed for sampling noise (default: derived from --seed)")


def _config_from_args(args: argparse.Namespace, **overrides) -> ExperimentConfig:
    kwargs = dict(
        hidden_dim=args.hidden_dim, window_len=args.window_len,
        epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
        shots=args.shots, n_qubits=args.n_qubits, depth=args.depth,
        n_points=args.n_points, train_fraction=args.train_fraction,
        noise_seed=args.noise_seed,
    )
    for name in ("dataset", "model", "seed", "out_dir"):
        if hasattr(args, name):
            kwargs[name] = getattr(args, name)
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qslstm",
        description="Benchmark classic, quantized-stochastic, and hybrid-quantum "
                    "LSTM variants on synthetic time series.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train one configuration and write artifacts")
    _add_run_flags(p_run)

    p_table = sub.add_parser("table", help="best-epoch comparison table from summary.json files")
    p_table.add_argument("summaries", nargs="+", type=Path)
    p_table.add_argument("--out", type=Path, default=None, help="also write the table as CSV")

    p_conv = sub.add_parser("convergence",
                            help="long-format (model, epoch, val_rmse) CSV from run dirs")
    p_conv.add_argument("runs", nargs="+", type=Path,
                        help="run directories or epochs.csv paths")
    p_conv.add_argument("--out", type=Path, required=True)

    p_batch = sub.add_parser("batch", help="cross-product sweep of datasets x models x seeds")
    p_batch.add_argument("--datasets", type=_str_list, default=["sine"])
    p_batch.add_argument("--models", type=_str_list, default=["classic"])
    p_batch.add_argument("--seeds", type=_int_list, default=[1])
    p_batch.add_argument("--out-root", type=Path, default=Path("runs"))
    p_batch.add_argument("--jobs", type=int, default=1,
                         help="worker processes for independent runs")
    _add_run_flags(p_batch, for_batch=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run_experiment(_config_from_args(args))
        if args.command == "table":
            rows, skipped = emit_table(args.summaries, args.out)
            if not rows:
                print("error: no usable summaries", file=sys.stderr)
                return 1
            print(format_table_text(rows))
            return 0
        if args.command == "convergence":
            skipped = emit_convergence(args.runs, args.out)
            if skipped == len(args.runs):
                print("error: no usable runs", file=sys.stderr)
                return 1
            print(f"wrote {args.out}")
            return 0
        if args.command == "batch":
            base = _config_from_args(args, dataset="sine", model="classic",
                                     seed=_DEFAULTS.seed, out_dir=_DEFAULTS.out_dir)
            return run_batch(args.datasets, args.models, args.seeds,
                             args.out_root, args.jobs, base)
        raise AssertionError(f"unhandled command {args.command}")
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
