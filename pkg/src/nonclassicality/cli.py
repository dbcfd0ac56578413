"""Command-line entry point.

Subcommands::

    simulate  --preset table1 | --config dataset.json  --out data.jsonl
    train     --dataset data.jsonl [--config model.json] --out ckpt.json
    evaluate  --checkpoint ckpt.json --dataset data.jsonl [--out preds.csv]
    witness   --dataset data.jsonl --witness mandel_q [--bias-grid lo:hi:n] --out curve.csv
    sweep     --dataset data.jsonl [--config model.json] --lambda-grid 0,0.4,0.8 --out curve.csv

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .alcla import AlClaConfig, TrainingError, extract_rule, forward, load_checkpoint, predict_labels, save_checkpoint, train
from .baselines import accuracy_report, lambda_sweep
from .datasets import (
    ConfigError,
    DatasetConfig,
    dataset_detector,
    preset,
    read_jsonl,
    simulate,
    to_sample_sets,
    write_jsonl,
)
from .detectors import DetectorError
from .io_utils import atomic_write_text
from .witnesses import WitnessError, bias_grid, evaluate_witness, sweep_bias

log = logging.getLogger("nonclassicality")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2
VALIDATION_ERRORS = (ConfigError, WitnessError, TrainingError, DetectorError, ValueError, KeyError, TypeError)


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:n`` for an equidistant grid, otherwise a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            if int(n) < 1:
                raise ValueError
            return np.linspace(float(lo), float(hi), int(n))
        vals = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}; use lo:hi:n or a comma list") from None
    if vals.size == 0:
        raise ConfigError("grid is empty")
    return vals


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _load_states(path: str):
    records = read_jsonl(path)
    if not records:
        raise ConfigError(f"{path}: dataset is empty")
    d = {r.d_x for r in records}
    if len(d) != 1:
        raise ConfigError(f"{path}: records mix mode counts {sorted(d)}")
    return records, to_sample_sets(records)


def _model_config(path: str | None, d_x: int) -> AlClaConfig:
    data = _load_json(path) if path else {}
    data.setdefault("d_x", d_x)
    try:
        cfg = AlClaConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if cfg.d_x != d_x:
        raise ConfigError(f"model d_x={cfg.d_x} but dataset has {d_x} modes")
    return cfg


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")


def _fmt_acc(acc) -> str:
    return f"classical {acc[0]:.4f}  nonclassical {acc[1]:.4f}  total {acc[2]:.4f}"


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    if (args.preset is None) == (args.config is None):
        raise ConfigError("give exactly one of --preset or --config")
    if args.preset is not None:
        cfg = preset(args.preset)
    else:
        cfg = DatasetConfig.from_dict(_load_json(args.config))
    cfg = cfg.with_overrides(seed=args.seed, M=args.samples)
    records = simulate(cfg)
    write_jsonl(args.out, records)
    n_ncl = sum(r.label for r in records)
    print(f"{cfg.name}: {len(records)} states ({len(records) - n_ncl} classical, {n_ncl} nonclassical), M={cfg.M} -> {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    records, states = _load_states(args.dataset)
    cfg = _model_config(args.config, records[0].d_x)
    result = train(states, cfg, seed=args.seed or 0)
    save_checkpoint(args.out, result)
    hist_path = str(Path(args.out).with_suffix("")) + ".history.csv"
    atomic_write_text(hist_path, result.history_csv())
    last = result.history[-1]
    print(f"epochs {cfg.epochs}, returned epoch {result.best_epoch}")
    print("train " + _fmt_acc([last[f"train_acc_{k}"] for k in ("classical", "nonclassical", "total")]))
    print("test  " + _fmt_acc([last[f"test_acc_{k}"] for k in ("classical", "nonclassical", "total")]))
    print("rule: " + extract_rule(result.params, cfg).to_text() + " < 0  =>  nonclassical")
    print(f"checkpoint -> {args.out}, history -> {hist_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.checkpoint is None:
        raise ConfigError("--checkpoint is required")
    records, states = _load_states(args.dataset)
    ckpt = load_checkpoint(args.checkpoint)
    if ckpt.config.d_x != records[0].d_x:
        raise ConfigError(f"checkpoint expects d_x={ckpt.config.d_x}, dataset has {records[0].d_x} modes")
    y = forward(states, ckpt.params, ckpt.config).y
    pred = predict_labels(y)
    labels = np.array([r.label for r in records])
    acc = accuracy_report(pred, labels)
    print(_fmt_acc(acc))
    if args.out:
        rows = [(r.state_id, r.label, repr(float(v)), int(p)) for r, v, p in zip(records, y, pred)]
        _write_csv(args.out, ("state_id", "label", "y", "prediction"), rows)
    return EXIT_OK


def cmd_witness(args) -> int:
    if args.witness is None:
        raise ConfigError("--witness is required")
    records, states = _load_states(args.dataset)
    detector = dataset_detector(records)
    reports = [evaluate_witness(args.witness, s, detector) for s in states]
    biases = parse_grid(args.bias_grid) if args.bias_grid else bias_grid(reports)
    curve = sweep_bias(reports, [r.label for r in records], biases, args.witness)
    curve.write_csv(args.out)
    print(f"{args.witness}: {len(biases)} bias points -> {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.lambda_grid is None:
        raise ConfigError("--lambda-grid is required")
    records, states = _load_states(args.dataset)
    cfg = _model_config(args.config, records[0].d_x)
    curve = lambda_sweep(states, cfg, parse_grid(args.lambda_grid), seed=args.seed or 0)
    curve.write_csv(args.out)
    for p in curve.points:
        print(f"lambda {p.param:g}: " + _fmt_acc((p.acc_classical, p.acc_nonclassical, p.total)))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "witness": cmd_witness,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonclassicality", description="Nonclassicality datasets, classifiers and witnesses.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "simulate": ("--preset", "--config", "--out", "--seed", "--samples"),
        "train": ("--dataset", "--config", "--out", "--seed"),
        "evaluate": ("--dataset", "--checkpoint", "--out"),
        "witness": ("--dataset", "--witness", "--bias-grid", "--out"),
        "sweep": ("--dataset", "--config", "--lambda-grid", "--out", "--seed"),
    }
    required = {"--out": {"simulate", "train", "witness", "sweep"}, "--dataset": set(specs) - {"simulate"}}
    helps = {
        "--bias-grid": "lo:hi:n or a comma list; write --bias-grid=-1:1:21 when the grid starts negative",
        "--lambda-grid": "lo:hi:n or a comma list",
    }
    for name, flags in specs.items():
        p = sub.add_parser(name)
        for flag in flags:
            kw = {}
            if flag in ("--seed", "--samples"):
                kw["type"] = int
            if name in required.get(flag, ()):
                kw["required"] = True
            if flag in helps:
                kw["help"] = helps[flag]
            p.add_argument(flag, **kw)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are validation errors
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
