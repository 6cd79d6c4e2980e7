"""Experiment runner CLI.

Subcommands:

* ``run <config.json>``   -- train one model and sweep it over SNR levels;
  writes ``train.json``, ``sweep.csv``, ``config.resolved.json``.
* ``grid <config.json>``  -- cross the config's grid lists (learning rate,
  layer count, encoding kind), run every point, and write a ranked table.
* ``sweep``               -- re-evaluate an existing ``train.json`` checkpoint.
* ``zoo``                 -- list built-in models and parameter counts.

Exit codes: 0 success, 2 invalid config, 3 training divergence. The
environment variable ``QCAE_OUT`` sets the default output root.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import zoo
from .autoencoder import (
    ModelSpec,
    QuantumRxSpec,
    QuantumTxSpec,
    TrainRecord,
    restore_model,
    spec_from_dict,
    spec_to_dict,
    train,
)
from .channel import SIGMA_MODES
from .errors import ConfigurationError, DivergenceError
from .evaluate import DEFAULT_LEVELS, snr_sweep, sweep_to_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


class ConfigError(ValueError):
    """Invalid experiment config; message names the offending field."""


# ---------------------------------------------------------------------------
# config loading / validation


def _require(cond: bool, field: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{field}: {message}")


def _resolve_model(raw, field: str = "model") -> ModelSpec:
    if isinstance(raw, str):
        try:
            return zoo.get(raw)
        except ConfigurationError as exc:
            raise ConfigError(f"{field}: {exc}") from exc
    if isinstance(raw, dict):
        try:
            return spec_from_dict(raw)
        except (KeyError, ConfigurationError, TypeError, ValueError) as exc:
            raise ConfigError(f"{field}: invalid inline model spec ({exc})") from exc
    raise ConfigError(f"{field}: expected a zoo name or an inline spec object")


def resolve_config(raw: dict, seed_override: int | None = None,
                   sigma_mode_override: str | None = None) -> dict:
    """Validate a raw experiment config and materialize every default.

    The result is self-contained: the model spec is inlined and a rerun
    from the resolved document reproduces the original byte for byte.
    """
    _require(isinstance(raw, dict), "<root>", "config must be a JSON object")
    _require("model" in raw, "model", "missing")
    spec = _resolve_model(raw["model"])

    sigma_mode = raw.get("sigma_mode", spec.channel.sigma_mode)
    if sigma_mode_override is not None:
        sigma_mode = sigma_mode_override
    _require(sigma_mode in SIGMA_MODES, "sigma_mode", f"must be one of {SIGMA_MODES}")
    spec = replace(spec, channel=replace(spec.channel, sigma_mode=sigma_mode))

    tr = raw.get("train", {})
    _require(isinstance(tr, dict), "train", "must be an object")
    if seed_override is not None:
        tr = {**tr, "seed": seed_override}
    _require("seed" in tr, "train.seed", "missing (seeds are mandatory)")
    train_block = {
        "steps": int(tr.get("steps", 2000)),
        "batch": int(tr.get("batch", 64)),
        "lr": float(tr.get("lr", 0.01)),
        "train_ebn0_db": float(tr.get("train_ebn0_db", 15.0)),
        "seed": int(tr["seed"]),
    }
    _require(train_block["steps"] >= 0, "train.steps", "must be >= 0")
    _require(train_block["batch"] >= 1, "train.batch", "must be >= 1")
    _require(train_block["lr"] > 0, "train.lr", "must be positive")

    ev = raw.get("eval", {})
    _require(isinstance(ev, dict), "eval", "must be an object")
    eval_block = {
        "levels": [float(v) for v in ev.get("levels", DEFAULT_LEVELS)],
        "batches": int(ev.get("batches", 10)),
        "batch": int(ev.get("batch", 64)),
        "seed": int(ev.get("seed", train_block["seed"])),
    }
    _require(len(eval_block["levels"]) >= 1, "eval.levels", "must be non-empty")
    _require(eval_block["batches"] >= 10, "eval.batches", "sweep points need >= 10 batches")

    resolved = {
        "model": spec_to_dict(spec),
        "sigma_mode": sigma_mode,
        "train": train_block,
        "eval": eval_block,
    }
    if "grid" in raw:
        grid = raw["grid"]
        _require(isinstance(grid, dict), "grid", "must be an object")
        allowed = {"lr", "layers", "encoding"}
        for key in grid:
            _require(key in allowed, f"grid.{key}", f"unknown axis; allowed: {sorted(allowed)}")
            _require(isinstance(grid[key], list) and grid[key],
                     f"grid.{key}", "must be a non-empty list")
        resolved["grid"] = grid
    return resolved


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"<file>: cannot read {path} ({exc})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<file>: {path} line {exc.lineno} col {exc.colno}: {exc.msg}") from exc


# ---------------------------------------------------------------------------
# grid expansion


def _quantum_side(spec: ModelSpec) -> str:
    if isinstance(spec.rx, QuantumRxSpec):
        return "rx"
    if isinstance(spec.tx, QuantumTxSpec):
        return "tx"
    return ""


def _apply_grid_point(resolved: dict, lr=None, layers=None, encoding=None) -> dict:
    point = json.loads(json.dumps(resolved))  # deep copy
    point.pop("grid", None)
    if lr is not None:
        point["train"]["lr"] = float(lr)
    spec = spec_from_dict(point["model"])
    side = _quantum_side(spec)
    if layers is not None or encoding is not None:
        if not side:
            raise ConfigError("grid.layers/encoding: model has no quantum component")
        circuit = (spec.rx if side == "rx" else spec.tx).circuit
        if layers is not None:
            circuit = replace(circuit, core=replace(circuit.core, layers=int(layers)))
        if encoding is not None:
            circuit = replace(circuit, encoding=replace(circuit.encoding, kind=str(encoding)))
        if side == "rx":
            spec = replace(spec, rx=QuantumRxSpec(circuit))
        else:
            spec = replace(spec, tx=QuantumTxSpec(circuit))
        point["model"] = spec_to_dict(spec)
    return point


def expand_grid(resolved: dict) -> list[tuple[str, dict]]:
    grid = resolved.get("grid")
    if not grid:
        raise ConfigError("grid: missing or empty")
    lrs = grid.get("lr", [None])
    layer_counts = grid.get("layers", [None])
    encodings = grid.get("encoding", [None])
    points = []
    idx = 0
    for lr in lrs:
        for layers in layer_counts:
            for enc in encodings:
                tag = f"g{idx:03d}"
                if lr is not None:
                    tag += f"_lr{lr}"
                if layers is not None:
                    tag += f"_L{layers}"
                if enc is not None:
                    tag += f"_{enc}"
                points.append((tag, _apply_grid_point(resolved, lr, layers, enc)))
                idx += 1
    return points


# ---------------------------------------------------------------------------
# run execution


def _default_out(config_path: str | Path | None, explicit: str | None, fallback: str) -> Path:
    if explicit:
        return Path(explicit)
    root = Path(os.environ.get("QCAE_OUT", "runs"))
    stem = Path(config_path).stem if config_path else fallback
    return root / stem


def execute_run(resolved: dict, outdir: Path) -> dict:
    """Train + sweep one resolved config; returns a summary row."""
    spec = spec_from_dict(resolved["model"])
    tr = resolved["train"]
    record = train(spec, steps=tr["steps"], batch=tr["batch"], lr=tr["lr"],
                   train_ebn0_db=tr["train_ebn0_db"], seed=tr["seed"])
    ev = resolved["eval"]
    model = restore_model(record)
    sweep = snr_sweep(model, ev["levels"], batches=ev["batches"],
                      batch=ev["batch"], seed=ev["seed"])
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "train.json").write_text(record.to_json())
    sweep_to_csv(sweep, outdir / "sweep.csv")
    (outdir / "config.resolved.json").write_text(json.dumps(resolved, indent=2, sort_keys=True))

    final_loss = float(np.mean(record.losses[-100:])) if record.losses else float("nan")
    if record.losses:
        threshold = 1.05 * final_loss
        convergence_step = next(
            (i for i, v in enumerate(record.losses) if v <= threshold), len(record.losses))
    else:
        convergence_step = 0
    ser_by_level = dict(zip(sweep.levels(), sweep.sers()))
    return {
        "outdir": str(outdir),
        "model": spec.name,
        "params": model.param_count,
        "final_train_ser": record.final_train_ser,
        "final_loss": final_loss,
        "convergence_step": convergence_step,
        "ser_15db": ser_by_level.get(15.0, min(ser_by_level.values())),
        "wall_clock_seconds": record.wall_clock_seconds,
    }


def _print_dry_run(resolved: dict) -> None:
    spec = spec_from_dict(resolved["model"])
    model = restore_model_counts(spec)
    print(f"config OK: model={spec.name} sigma_mode={resolved['sigma_mode']}")
    print(f"  tx params: {model['tx']}  rx params: {model['rx']}  total: {model['total']}")
    print(f"  train: {resolved['train']}")
    print(f"  eval:  {resolved['eval']}")


def restore_model_counts(spec: ModelSpec) -> dict:
    from .autoencoder import assemble

    m = assemble(spec, 0)
    return {"tx": m.tx_param_count, "rx": m.rx_param_count, "total": m.param_count}


# ---------------------------------------------------------------------------
# subcommands


def cmd_zoo(args) -> int:
    print(f"{'name':14s} {'tx':>22s} {'rx':>22s} {'total':>6s}  channel")
    for name in zoo.names():
        spec = zoo.get(name)
        counts = restore_model_counts(spec)
        tx_kind = spec.tx.kind
        rx_kind = spec.rx.kind
        ch = f"{spec.channel.family} R={spec.channel.rate:g} n={spec.uses}"
        print(f"{name:14s} {tx_kind + ' ' + str(counts['tx']):>22s} "
              f"{rx_kind + ' ' + str(counts['rx']):>22s} {counts['total']:>6d}  {ch}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        raw = load_config(args.config)
        resolved = resolve_config(raw, args.seed, args.sigma_mode)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        _print_dry_run(resolved)
        return EXIT_OK
    outdir = _default_out(args.config, args.out, "run")
    try:
        summary = execute_run(resolved, outdir)
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    print(f"run complete: {summary['outdir']}")
    print(f"  final train SER: {summary['final_train_ser']:.4f}  "
          f"eval SER@15dB: {summary['ser_15db']:.4f}  "
          f"({summary['wall_clock_seconds']:.1f}s)")
    return EXIT_OK


def cmd_grid(args) -> int:
    try:
        raw = load_config(args.config)
        resolved = resolve_config(raw, args.seed, args.sigma_mode)
        points = expand_grid(resolved)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        for tag, point in points:
            print(f"--- {tag}")
            _print_dry_run(point)
        return EXIT_OK
    outdir = _default_out(args.config, args.out, "grid")
    rows = []
    for tag, point in points:
        try:
            summary = execute_run(point, outdir / tag)
        except DivergenceError as exc:
            print(f"{tag}: training diverged: {exc}", file=sys.stderr)
            return EXIT_DIVERGED
        summary["tag"] = tag
        rows.append(summary)
        print(f"{tag}: train SER {summary['final_train_ser']:.4f}  "
              f"SER@15dB {summary['ser_15db']:.4f}")
    # rank: eval SER at 15 dB, then parameter count, then convergence step
    rows.sort(key=lambda r: (r["ser_15db"], r["params"], r["convergence_step"], r["tag"]))
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "grid_results.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "tag", "model", "params", "ser_15db",
                         "final_train_ser", "final_loss", "convergence_step", "outdir"])
        for rank, r in enumerate(rows, 1):
            writer.writerow([rank, r["tag"], r["model"], r["params"], r["ser_15db"],
                             r["final_train_ser"], r["final_loss"],
                             r["convergence_step"], r["outdir"]])
    print(f"grid complete: {outdir / 'grid_results.csv'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.batches < 10:
        print("invalid arguments: --batches must be >= 10 (sweep-point contract)",
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        record = TrainRecord.from_dict(json.loads(Path(args.checkpoint).read_text()))
    except (OSError, KeyError, ValueError) as exc:
        print(f"invalid checkpoint: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    model = restore_model(record)
    if args.sigma_mode:
        model.spec = replace(model.spec,
                             channel=replace(model.spec.channel, sigma_mode=args.sigma_mode))
    levels = [float(v) for v in args.levels] if args.levels else list(DEFAULT_LEVELS)
    seed = args.seed if args.seed is not None else record.seed
    sweep = snr_sweep(model, levels, batches=args.batches, batch=args.batch, seed=seed)
    outdir = _default_out(None, args.out, "sweep")
    outdir.mkdir(parents=True, exist_ok=True)
    out_path = outdir / "sweep.csv"
    sweep_to_csv(sweep, out_path)
    for p in sweep.points:
        print(f"  {p.ebn0_db:5.1f} dB  SER {p.ser:.5f}")
    print(f"sweep written: {out_path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qcae", description="channel-autoencoder experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", help="output directory (default: $QCAE_OUT/<config stem>)")
        p.add_argument("--seed", type=int, help="override the training seed")
        p.add_argument("--dry-run", action="store_true",
                       help="validate and print resolved parameter counts only")
        p.add_argument("--sigma-mode", choices=SIGMA_MODES,
                       help="override the noise-scale convention")

    p_run = sub.add_parser("run", help="train + evaluate one config")
    p_run.add_argument("config")
    add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_grid = sub.add_parser("grid", help="cross the config's grid lists and rank results")
    p_grid.add_argument("config")
    add_common(p_grid)
    p_grid.set_defaults(func=cmd_grid)

    p_zoo = sub.add_parser("zoo", help="list built-in models")
    p_zoo.set_defaults(func=cmd_zoo)

    p_sweep = sub.add_parser("sweep", help="re-evaluate an existing checkpoint")
    p_sweep.add_argument("--checkpoint", required=True, help="path to a train.json")
    p_sweep.add_argument("--levels", nargs="*", type=float)
    p_sweep.add_argument("--batches", type=int, default=10)
    p_sweep.add_argument("--batch", type=int, default=64)
    add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
