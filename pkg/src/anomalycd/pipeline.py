"""End-to-end detection: tiling, parallel per-tile Stage 1, scene-level
fusion/selection, and Stage 2 anomaly scoring.

Per-tile work is embarrassingly parallel; all scene-level reductions (stitch,
quantile, candidate ranking) are order-independent, so results are identical
for any worker count.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .embedding import (METRICS, STRIDE, EmbeddingMap, cache_filename,
                        read_cache, reference_embed)
from .errors import CacheError, ConfigError
from .scene import TimeSeriesScene, TileSpec, extract_tile, plan_tiles, stitch
from .segment import (DEFAULT_GRID, DEFAULT_GROW_THRESHOLD, DEFAULT_MIN_AREA,
                      DEFAULT_STABILITY_MIN, segment)
from .stage1 import (DEFAULT_KEEP_FRACTION, DEFAULT_QUANTILE,
                     CandidateInstance, direction_density, fuse_binarize,
                     select_candidates)
from .stage2 import AnomalyScoreRecord, binarize_anomalies, score_candidates

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    tile_size: int = 2048
    quantile: float = DEFAULT_QUANTILE
    keep_fraction: float = DEFAULT_KEEP_FRACTION
    metric: str = "cosine"
    embedder: str = "reference"  # reference | cache
    cache_dir: str | None = None
    stride: int = STRIDE
    grid: int = DEFAULT_GRID
    min_area: int = DEFAULT_MIN_AREA
    stability_min: float = DEFAULT_STABILITY_MIN
    grow_threshold: float = DEFAULT_GROW_THRESHOLD
    workers: int = 0  # 0 = available parallelism
    beta: float = 0.1

    def __post_init__(self) -> None:
        if self.tile_size < 64:
            raise ConfigError(f"tile_size must be >= 64, got {self.tile_size}")
        if not 0.0 < self.quantile < 1.0:
            raise ConfigError(f"quantile must be in (0, 1), got {self.quantile}")
        if not 0.0 < self.keep_fraction <= 1.0:
            raise ConfigError(
                f"keep_fraction must be in (0, 1], got {self.keep_fraction}")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.embedder not in ("reference", "cache"):
            raise ConfigError(
                f"embedder must be 'reference' or 'cache', got {self.embedder!r}")
        if self.embedder == "cache" and not self.cache_dir:
            raise ConfigError("cache_dir is required with embedder='cache'")
        if not self.beta > 0:
            raise ConfigError(f"beta must be > 0, got {self.beta}")
        if self.workers < 0:
            raise ConfigError(f"workers must be >= 0, got {self.workers}")

    @property
    def effective_workers(self) -> int:
        return self.workers or os.cpu_count() or 1

    @property
    def segment_params(self) -> dict:
        return {"grid": self.grid, "min_area": self.min_area,
                "stability_min": self.stability_min,
                "grow_threshold": self.grow_threshold}

    def as_dict(self) -> dict:
        return asdict(self)


class EmbeddingProvider:
    """Lazy, memoized per-(step, tile) embeddings for one scene."""

    def __init__(self, scene: TimeSeriesScene, tiles: list[TileSpec],
                 config: RunConfig):
        self._scene = scene
        self._tiles = tiles
        self._config = config
        self._memo: dict[tuple[int, int], EmbeddingMap] = {}
        self.n_steps = len(scene.steps)

    def __call__(self, step: int, tile_index: int) -> EmbeddingMap:
        step = step % self.n_steps
        key = (step, tile_index)
        if key not in self._memo:
            self._memo[key] = self._compute(step, tile_index)
        return self._memo[key]

    def _compute(self, step: int, tile_index: int) -> EmbeddingMap:
        spec = self._tiles[tile_index]
        if self._config.embedder == "cache":
            path = Path(self._config.cache_dir) / cache_filename(
                self._scene.timestamps[step], spec.x0, spec.y0)
            if not path.is_file():
                raise CacheError(f"missing embedding cache file {path}")
            emb = read_cache(path)
            if emb.h * emb.stride != spec.size:
                raise CacheError(
                    f"cache grid {emb.h}x{emb.w} stride {emb.stride} does not "
                    f"cover tile size {spec.size} in {path}")
            return emb
        tile = extract_tile(self._scene.steps[step], spec)
        return reference_embed(tile, self._config.stride)


@dataclass
class DetectionResult:
    config: RunConfig
    tiles: list[TileSpec]
    fused_density: np.ndarray      # stitched max(C_t, C_x)
    stage1_map: np.ndarray         # binary C_b
    candidates: list[CandidateInstance]     # top keep_fraction, ranked
    all_candidates: list[CandidateInstance]
    records: list[AnomalyScoreRecord]
    anomaly_map: np.ndarray        # binary Stage-2 output
    timings: dict


def _stage1_tile(scene: TimeSeriesScene, spec: TileSpec, tile_index: int,
                 provider: EmbeddingProvider, config: RunConfig):
    tile_t = extract_tile(scene.steps[-2], spec)
    tile_x = extract_tile(scene.steps[-1], spec)
    f_t = provider(len(scene.steps) - 2, tile_index)
    f_x = provider(len(scene.steps) - 1, tile_index)
    common = dict(metric=config.metric, tile_index=tile_index, f_t=f_t, f_x=f_x,
                  stride=config.stride, segment_params=config.segment_params)
    dens_t, cands_t = direction_density(tile_t, tile_x, "T1", **common)
    dens_x, cands_x = direction_density(tile_t, tile_x, "X", **common)
    return dens_t.values, dens_x.values, cands_t + cands_x


def detect(scene: TimeSeriesScene, config: RunConfig | None = None,
           history_limit: int | None = None) -> DetectionResult:
    """Run the full two-stage pipeline on one scene.

    history_limit restricts Stage 2 to the most recent N history steps (used
    by the time-step ablation); None uses all of them.
    """
    config = config or RunConfig()
    if scene.n_history < 2:
        logger.warning("scene %s has only %d history step(s); Stage 2 "
                       "degenerates to bi-temporal comparison",
                       scene.event_id, scene.n_history)
    timings: dict[str, float] = {}
    t0 = time.perf_counter()

    tiles = plan_tiles(scene.height, scene.width, config.tile_size)
    provider = EmbeddingProvider(scene, tiles, config)

    def run_tile(i: int):
        return _stage1_tile(scene, tiles[i], i, provider, config)

    n_workers = config.effective_workers
    if n_workers > 1 and len(tiles) > 1:
        # per-tile embeddings are memoized per provider; computing them inside
        # worker threads is safe because each (step, tile) key is touched by
        # exactly one tile task at this point
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            tile_results = list(pool.map(run_tile, range(len(tiles))))
    else:
        tile_results = [run_tile(i) for i in range(len(tiles))]
    timings["stage1_tiles_s"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    dens_t = stitch([(tiles[i], r[0]) for i, r in enumerate(tile_results)],
                    scene.height, scene.width)
    dens_x = stitch([(tiles[i], r[1]) for i, r in enumerate(tile_results)],
                    scene.height, scene.width)
    fused = np.maximum(dens_t, dens_x)
    stage1_map = fuse_binarize(dens_t, dens_x, config.quantile)
    all_candidates = [c for r in tile_results for c in r[2]]
    candidates = select_candidates(all_candidates, config.keep_fraction)
    timings["stage1_fuse_s"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    if history_limit is not None:
        provider_view = _HistoryLimitedProvider(provider, history_limit)
    else:
        provider_view = provider
    records = score_candidates(candidates, provider_view, config.metric)
    anomaly_map = binarize_anomalies(records, (scene.height, scene.width),
                                     tiles, config.quantile)
    timings["stage2_s"] = time.perf_counter() - t2
    timings["total_s"] = time.perf_counter() - t0

    return DetectionResult(config=config, tiles=tiles, fused_density=fused,
                           stage1_map=stage1_map, candidates=candidates,
                           all_candidates=all_candidates, records=records,
                           anomaly_map=anomaly_map, timings=timings)


class _HistoryLimitedProvider:
    """View of a provider exposing only the most recent N history steps."""

    def __init__(self, provider: EmbeddingProvider, history_limit: int):
        if history_limit < 1:
            raise ConfigError("history_limit must be >= 1")
        self._provider = provider
        n_hist = min(history_limit, provider.n_steps - 1)
        self.n_steps = n_hist + 1
        self._offset = provider.n_steps - self.n_steps

    def __call__(self, step: int, tile_index: int) -> EmbeddingMap:
        step = step % self.n_steps
        return self._provider(step + self._offset, tile_index)
