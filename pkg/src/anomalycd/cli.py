"""Command-line entry point: anomalycd detect | eval | sweep | synth.

Exit codes: 0 success, 1 internal error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import io as acd_io
from .baselines import cva, image_diff, ts_cva
from .errors import AnomalyCDError, ConfigError
from .metrics import evaluate_event, format_report, aggregate
from .pipeline import RunConfig, detect
from .scene import load_scene
from .stage1 import quantile_threshold
from .sweeps import SWEEPABLE, sweep
from .synth import SynthConfig, generate_directory

logger = logging.getLogger("anomalycd")


def _build_config(args: argparse.Namespace) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
    overrides = {name: getattr(args, name) for name in
                 ("tile_size", "quantile", "keep_fraction", "metric",
                  "embedder", "cache_dir", "workers", "beta")
                 if getattr(args, name, None) is not None}
    merged = {**base, **overrides}
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    return RunConfig(**merged)


def _cmd_detect(args: argparse.Namespace) -> int:
    config = _build_config(args)
    scene = load_scene(args.scene)
    result = detect(scene, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    acd_io.save_binary_png(result.stage1_map, out / "stage1_change_map.png")
    acd_io.save_binary_png(result.anomaly_map, out / "anomaly_map.png")
    acd_io.save_density_png(result.fused_density, out / "fused_density.png")
    acd_io.write_candidates_jsonl(result.candidates, out / "candidates.jsonl")
    acd_io.write_records_jsonl(result.records, out / "anomaly_scores.jsonl")
    (out / "config.json").write_text(json.dumps(config.as_dict(), indent=2))
    (out / "timings.json").write_text(json.dumps(result.timings, indent=2))

    if args.baseline:
        t1, x = scene.steps[-2], scene.steps[-1]
        dmap = {"id": lambda: image_diff(t1, x),
                "cva": lambda: cva(t1, x),
                "ts_cva": lambda: ts_cva(scene, config.metric,
                                         tile_size=config.tile_size)}[args.baseline]()
        binary = dmap.values > quantile_threshold(dmap.values, config.quantile)
        acd_io.save_binary_png(binary, out / f"baseline_{args.baseline}_map.png")

    print(f"wrote detection outputs to {out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    pred = acd_io.load_binary_png(args.pred)
    gt = acd_io.load_binary_png(args.gt)
    ev = evaluate_event(pred, gt, beta=args.beta)
    report = aggregate([ev], config={"beta": args.beta})
    print(json.dumps(report.as_dict(), indent=2))
    print(format_report(report))
    if args.out:
        Path(args.out).write_text(json.dumps(report.as_dict(), indent=2))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _build_config(args)
    scenes = [load_scene(d) for d in args.scenes]
    values: list = args.values.split(",")
    reports = sweep(args.param, values, scenes, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for value, report in zip(values, reports):
        path = out / f"sweep_{args.param}_{value}.json"
        path.write_text(json.dumps(report.as_dict(), indent=2))
        print(f"{args.param}={value}: F1={report.overall['F1']:.2f} "
              f"({report.config['wall_clock_s']:.1f}s) -> {path}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    cfg = SynthConfig(seed=args.seed, size=args.size, steps=args.steps,
                      movers=args.movers)
    if cfg.steps - 1 < 2:
        logger.warning("steps=%d gives a single history step; Stage 2 will "
                       "degenerate to bi-temporal detection", cfg.steps)
    out = generate_directory(cfg, args.out)
    print(f"wrote synthetic scene to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anomalycd",
        description="Zero-shot anomaly change detection on time-series rasters")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file of RunConfig fields")
        p.add_argument("--tile", dest="tile_size", type=int)
        p.add_argument("--quantile", type=float)
        p.add_argument("--keep", dest="keep_fraction", type=float)
        p.add_argument("--metric", choices=("cosine", "l1", "l2"))
        p.add_argument("--embedder", choices=("reference", "cache"))
        p.add_argument("--cache-dir", dest="cache_dir")
        p.add_argument("--workers", type=int)
        p.add_argument("--beta", type=float)

    p = sub.add_parser("detect", help="run the two-stage pipeline on a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--baseline", choices=("id", "cva", "ts_cva"),
                   help="additionally run a baseline detector")
    add_config_flags(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("eval", help="score a prediction map against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="parameter sweep over a scene list")
    p.add_argument("--param", required=True, choices=SWEEPABLE)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--scenes", nargs="+", required=True)
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic scene directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--movers", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AnomalyCDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
