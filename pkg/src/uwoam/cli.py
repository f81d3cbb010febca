"""Command line entry point: simulate, analyze, reproduce, validate."""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from .analysis.fidelity import DetectionError
from .analysis.tables import write_orientations
from .detector import read_pgm
from .runner.config import ConfigError, load_config, schema_text, validate_config
from .runner.pipeline import analyze_frames, run_experiment
from .runner.reproduce import REGISTRY, UnknownStatistic, reproduce


def _simulate(args) -> int:
    problems = validate_config(args.config)
    if problems:
        print(f"{args.config}: invalid config", file=sys.stderr)
        for p in problems:
            print(f"  - {p}", file=sys.stderr)
        return 2
    cfg = load_config(args.config)
    if args.output:
        cfg = cfg.with_output(args.output)
    if args.workers:
        cfg = replace(cfg, workers=args.workers)
    manifest = run_experiment(cfg)
    for i, s in enumerate(manifest.states):
        fields = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in s.items())
        print(f"state {i:02d}: {fields}")
    if manifest.failures:
        print(f"{len(manifest.failures)} analysis failures recorded in the manifest")
    print(f"wrote {len(manifest.files)} files and manifest.txt to {cfg.output_dir}")
    return 0


def _analyze(args) -> int:
    paths = sorted(Path(args.frames_dir).glob("*.pgm"))
    if not paths:
        print(f"no .pgm frames in {args.frames_dir}", file=sys.stderr)
        return 1
    frames = [read_pgm(p) for p in paths]
    try:
        series = analyze_frames(frames, args.ell, math.radians(args.sent_theta), args.threshold, args.smoothing)
    except DetectionError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(f"frames {len(frames)}, gaps {series.failures}")
    print(f"fidelity mean {series.mean:.5f} std {series.std:.5f} min {series.min:.5f} max {series.max:.5f}")
    if args.csv:
        write_orientations(args.csv, series, [f.index for f in frames])
        print(f"wrote {args.csv}")
    return 0


def _reproduce(args) -> int:
    if args.name == "list":
        for name, recipe in REGISTRY.items():
            print(f"{name:26s} {'stand-in ' if recipe.stand_in else '         '}{recipe.summary}")
        return 0
    try:
        report = reproduce(args.name, args.output, args.scale)
    except UnknownStatistic as exc:
        print(str(exc), file=sys.stderr)
        return 2
    print(report.text())
    return 1 if report.verdict == "fail" else 0


def _validate(args) -> int:
    problems = validate_config(args.config)
    if problems:
        print(f"{args.config}: {len(problems)} problem(s)")
        for p in problems:
            print(f"  - {p}")
        return 2
    print(f"{args.config}: ok")
    return 0


def _schema(args) -> int:
    print(schema_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uwoam", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an experiment config end to end")
    p.add_argument("config")
    p.add_argument("--output", help="override experiment.output_dir")
    p.add_argument("--workers", type=int, help="override experiment.workers")
    p.set_defaults(func=_simulate)

    p = sub.add_parser("analyze", help="fidelity series for a directory of PGM frames")
    p.add_argument("frames_dir")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--sent-theta", type=float, required=True, help="sent relative phase, degrees")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--smoothing", type=int, default=2)
    p.add_argument("--csv", help="write per-frame orientations here")
    p.set_defaults(func=_analyze)

    p = sub.add_parser("reproduce", help="run a canned recipe; 'list' shows the registry")
    p.add_argument("name")
    p.add_argument("--output", help="keep the run's frames and tables here")
    p.add_argument("--scale", type=float, default=1.0, help="scale frame counts (quick look)")
    p.set_defaults(func=_reproduce)

    p = sub.add_parser("validate", help="check a config file and list every problem")
    p.add_argument("config")
    p.set_defaults(func=_validate)

    p = sub.add_parser("schema", help="print every config key with its default")
    p.set_defaults(func=_schema)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
