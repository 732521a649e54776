"""Runnable experiments: time-step ablation and parameter sweeps."""

from __future__ import annotations

import time
from dataclasses import replace

from .errors import ConfigError
from .metrics import EvalReport, aggregate, evaluate_event
from .pipeline import DetectionResult, RunConfig, detect
from .scene import TimeSeriesScene

SWEEPABLE = ("quantile", "tile_size", "metric", "timesteps")


def evaluate_scenes(scenes: list[TimeSeriesScene], config: RunConfig,
                    history_limit: int | None = None, *,
                    stage1_only: bool = False,
                    ) -> tuple[EvalReport, list[DetectionResult]]:
    """Detect on every scene (all must carry gt) and macro-aggregate."""
    results = []
    events = []
    for scene in scenes:
        if scene.gt_mask is None:
            raise ConfigError(f"scene {scene.event_id} has no ground truth")
        res = detect(scene, config, history_limit=history_limit)
        pred = res.stage1_map if stage1_only else res.anomaly_map
        events.append(evaluate_event(pred, scene.gt_mask,
                                     event_id=scene.event_id,
                                     category=scene.category,
                                     beta=config.beta))
        results.append(res)
    echo = config.as_dict()
    echo["history_limit"] = history_limit
    echo["stage1_only"] = stage1_only
    return aggregate(events, config=echo), results


def ablate_timesteps(scene: TimeSeriesScene, k_removed: int,
                     config: RunConfig | None = None) -> tuple[EvalReport, DetectionResult]:
    """Rerun Stage 2 with the k oldest history steps removed."""
    config = config or RunConfig()
    if k_removed < 0 or scene.n_history - k_removed < 1:
        raise ConfigError(
            f"cannot remove {k_removed} of {scene.n_history} history steps")
    limit = scene.n_history - k_removed
    report, results = evaluate_scenes([scene], config, history_limit=limit)
    return report, results[0]


def sweep(param: str, values: list, scenes: list[TimeSeriesScene],
          config: RunConfig | None = None) -> list[EvalReport]:
    """One macro report per value; wall-clock recorded in each report config."""
    config = config or RunConfig()
    if param not in SWEEPABLE:
        raise ConfigError(f"unknown sweep parameter {param!r}; "
                          f"choose from {SWEEPABLE}")
    reports = []
    for value in values:
        t0 = time.perf_counter()
        if param == "timesteps":
            k = int(value)
            limit = max(1, min(s.n_history for s in scenes) - k)
            report, _ = evaluate_scenes(scenes, config, history_limit=limit)
        else:
            cast = {"quantile": float, "tile_size": int, "metric": str}[param]
            report, _ = evaluate_scenes(scenes, replace(config, **{param: cast(value)}))
        report.config["sweep_param"] = param
        report.config["sweep_value"] = value
        report.config["wall_clock_s"] = time.perf_counter() - t0
        reports.append(report)
    return reports
