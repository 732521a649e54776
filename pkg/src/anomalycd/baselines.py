"""Label-free comparison detectors: image differencing, change vector
analysis, and the time-series embedding-space CVA variant."""

from __future__ import annotations

import numpy as np

from .embedding import STRIDE, distance_maps, reference_embed
from .scene import TimeSeriesScene, extract_tile, plan_tiles, stitch
from .stage1 import ChangeDensityMap


def image_diff(t1: np.ndarray, x: np.ndarray) -> ChangeDensityMap:
    """Per-pixel mean absolute difference over channels."""
    if t1.shape != x.shape:
        raise ValueError(f"dimension mismatch: {t1.shape} vs {x.shape}")
    return ChangeDensityMap(values=np.abs(x - t1).mean(axis=2),
                            provenance="baseline")


def cva(t1: np.ndarray, x: np.ndarray) -> ChangeDensityMap:
    """Per-pixel Euclidean magnitude of the channel-difference vector."""
    if t1.shape != x.shape:
        raise ValueError(f"dimension mismatch: {t1.shape} vs {x.shape}")
    return ChangeDensityMap(values=np.linalg.norm(x - t1, axis=2),
                            provenance="baseline")


def ts_cva(scene: TimeSeriesScene, metric: str = "cosine", *,
           tile_size: int = 2048, stride: int = STRIDE,
           history_limit: int | None = None) -> ChangeDensityMap:
    """Per-cell minimum embedding distance from X to any history step,
    replicated back to pixel resolution.

    history_limit = 1 restricts the comparison to T_1, reducing this to the
    plain bi-temporal embedding-distance map.
    """
    tiles = plan_tiles(scene.height, scene.width, tile_size)
    history = scene.history
    if history_limit is not None:
        history = history[:history_limit]
    outputs = []
    for spec in tiles:
        x_emb = reference_embed(extract_tile(scene.current, spec), stride)
        best = None
        for hist_raster in history:
            h_emb = reference_embed(extract_tile(hist_raster, spec), stride)
            d = distance_maps(x_emb.data, h_emb.data, metric)
            best = d if best is None else np.minimum(best, d)
        pix = np.repeat(np.repeat(best, stride, axis=0), stride, axis=1)
        outputs.append((spec, pix))
    return ChangeDensityMap(values=stitch(outputs, scene.height, scene.width),
                            provenance="baseline")


def embedding_distance_map(scene: TimeSeriesScene, metric: str = "cosine", *,
                           tile_size: int = 2048,
                           stride: int = STRIDE) -> ChangeDensityMap:
    """Bi-temporal embedding distance between X and T_1 (ts_cva with n=1)."""
    return ts_cva(scene, metric, tile_size=tile_size, stride=stride,
                  history_limit=1)
