"""Command-line harness: ``train``, ``eval``, ``baseline`` and ``validate``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from typing import Sequence

from . import __version__
from .baselines import KINDS, run_baseline
from .config import ExperimentConfig, cross_validate, load_experiment, with_seed
from .env import SpinEnv
from .errors import IncompatibleCheckpoint, SpinRLError
from .ppo.checkpoint import load_checkpoint, save_checkpoint
from .ppo.evaluate import evaluate
from .ppo.trainer import CsvMetrics, train


def _load(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_experiment(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = with_seed(cfg, args.seed)
    cross_validate(cfg)
    return cfg


def _out_dir(args: argparse.Namespace, cfg: ExperimentConfig, sub: str) -> str:
    out = args.out or cfg.out_dir or os.path.join("runs", cfg.label, sub)
    os.makedirs(out, exist_ok=True)
    return out


def write_manifest(out: str, cfg: ExperimentConfig, command: str) -> None:
    effective = cfg.effective()
    manifest = {
        "command": command,
        "config_sha256": cfg.sha256(),
        "seed": cfg.seed,
        "version": __version__,
        "start_time": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "effective_config": effective,
    }
    with open(os.path.join(out, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(effective, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _env(cfg: ExperimentConfig, seed: int | None = None) -> SpinEnv:
    scenario = cfg.scenario if seed is None else replace(cfg.scenario, seed=seed)
    return SpinEnv(scenario, cfg.aircraft, cfg.aero)


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg, "train")
    write_manifest(out, cfg, "train")
    metrics = CsvMetrics(os.path.join(out, "metrics.csv"))
    ckpt = train(lambda s: _env(cfg, s), cfg.ppo, metrics, out)
    save_checkpoint(ckpt, os.path.join(out, "final.ckpt"))
    print(f"trained {ckpt.updates} updates, {ckpt.episodes} episodes -> {out}")
    return 0


def _report(out: str, summary: dict) -> None:
    brief = {k: summary[k] for k in ("rate_arrest_time_s", "final_abs_e_alpha_rad", "altitude_loss_ft", "return")}
    print(json.dumps(brief, sort_keys=True))
    print(f"outputs -> {out}")


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load(args)
    ckpt = load_checkpoint(args.checkpoint)
    out = _out_dir(args, cfg, "eval")
    write_manifest(out, cfg, "eval")
    report = evaluate(ckpt, _env(cfg), args.episodes, args.deterministic, cfg.seed, out)
    _report(out, report.summary())
    return 0


def cmd_baseline(args: argparse.Namespace) -> int:
    cfg = _load(args)
    cfg = replace(cfg, baseline=replace(cfg.baseline, kind=args.kind))
    out = _out_dir(args, cfg, f"baseline_{args.kind}")
    write_manifest(out, cfg, f"baseline {args.kind}")
    report = run_baseline(cfg.baseline, _env(cfg), args.episodes, out)
    _report(out, report.summary())
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    print(json.dumps(cfg.effective(), indent=2, sort_keys=True))
    print(f"config_sha256 {cfg.sha256()}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinrl", description="Spin-recovery reinforcement learning harness.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, seed: bool = True, out: bool = True) -> None:
        p.add_argument("--config", required=True, help="experiment, scenario or manifest JSON")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="override the master seed")
        if out:
            p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("train", help="train a PPO policy")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--deterministic", action="store_true", help="act with the policy mean")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("baseline", help="roll out a scripted controller")
    p.add_argument("kind", choices=KINDS)
    common(p)
    p.add_argument("--episodes", type=int, default=1)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("validate", help="check every config file without running")
    common(p, seed=False, out=False)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "episodes", 1) < 1:
        parser.error("--episodes must be >= 1")
    try:
        return args.func(args)
    except IncompatibleCheckpoint as exc:
        print(f"error: incompatible checkpoint: {exc}", file=sys.stderr)
        return 3
    except SpinRLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
