"""Stage 1: bidirectional bi-temporal change detection in embedding space.

Instances are segmented in both temporal directions (masks from the last
historical image catch disappearances, masks from the current image catch
appearances), scored by the distance between their mean embeddings in the two
images, painted into per-direction density maps, fused by per-pixel max, and
binarized at a rank quantile of the fused map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .embedding import (EmbeddingMap, GridMask, distance, mask_mean_embedding,
                        project_mask, reference_embed)
from .segment import InstanceMaskSet, segment

DIRECTIONS = ("from_T1", "from_X")

DEFAULT_QUANTILE = 0.94
DEFAULT_KEEP_FRACTION = 0.30


@dataclass(frozen=True)
class ChangeDensityMap:
    """Per-pixel continuous score raster."""

    values: np.ndarray
    provenance: str = "stage1"  # stage1 | stage2 | baseline

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2 or not np.all(np.isfinite(v)) or (v < 0).any():
            raise ValueError("density map must be 2-D, finite and non-negative")


@dataclass(frozen=True)
class CandidateInstance:
    """One scored instance from one temporal direction of one tile."""

    tile_index: int
    instance_id: int
    direction: str  # from_T1 | from_X
    score: float
    tile_mask: np.ndarray  # bool, tile-local (padded) coordinates

    def sort_key(self) -> tuple:
        return (self.tile_index, self.instance_id, DIRECTIONS.index(self.direction))


def change_score(m: GridMask, f_t: EmbeddingMap, f_x: EmbeddingMap,
                 metric: str = "cosine") -> float:
    """Distance between the mask's mean embeddings in the two images."""
    if (f_t.h, f_t.w) != (f_x.h, f_x.w) or f_t.dim != f_x.dim:
        raise ValueError("grid mismatch between the two embedding maps")
    return distance(mask_mean_embedding(f_t, m), mask_mean_embedding(f_x, m), metric)


def direction_density(tile_t: np.ndarray, tile_x: np.ndarray,
                      masks_from: str, metric: str = "cosine", *,
                      tile_index: int = 0,
                      f_t: EmbeddingMap | None = None,
                      f_x: EmbeddingMap | None = None,
                      masks: InstanceMaskSet | None = None,
                      stride: int = 16,
                      segment_params: dict | None = None,
                      ) -> tuple[ChangeDensityMap, list[CandidateInstance]]:
    """Score every instance of the designated image in one direction.

    masks_from = "T1" segments the historical image (disappearance case),
    "X" segments the current image (appearance case). Each instance's pixels
    are painted with its change score; unassigned pixels stay 0.
    """
    if tile_t.shape != tile_x.shape:
        raise ValueError(
            f"dimension mismatch: {tile_t.shape} vs {tile_x.shape}")
    if masks_from not in ("T1", "X"):
        raise ValueError(f"masks_from must be 'T1' or 'X', got {masks_from!r}")
    if f_t is None:
        f_t = reference_embed(tile_t, stride)
    if f_x is None:
        f_x = reference_embed(tile_x, stride)
    if masks is None:
        masks = segment(tile_t if masks_from == "T1" else tile_x,
                        **(segment_params or {}))

    direction = "from_T1" if masks_from == "T1" else "from_X"
    density = np.zeros(tile_t.shape[:2], dtype=np.float64)
    candidates = []
    for rec in masks.instances:
        pix = masks.mask_of(rec.id)
        gm = project_mask(pix, stride=f_t.stride)
        s = change_score(gm, f_t, f_x, metric)
        density[pix] = s
        candidates.append(CandidateInstance(
            tile_index=tile_index, instance_id=rec.id,
            direction=direction, score=s, tile_mask=pix))
    return ChangeDensityMap(values=density, provenance="stage1"), candidates


def quantile_threshold(values: np.ndarray, q: float) -> float:
    """Nearest-rank quantile: sorted_ascending[floor(q * (N - 1))]."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile must be in (0, 1), got {q}")
    flat = np.sort(np.asarray(values).ravel())
    return float(flat[math.floor(q * (flat.size - 1))])


def fuse_binarize(c_t: ChangeDensityMap | np.ndarray,
                  c_x: ChangeDensityMap | np.ndarray,
                  q: float = DEFAULT_QUANTILE) -> np.ndarray:
    """Per-pixel max of the two direction maps, thresholded at quantile q.

    A pixel is set iff its fused value strictly exceeds the threshold.
    """
    vt = c_t.values if isinstance(c_t, ChangeDensityMap) else np.asarray(c_t)
    vx = c_x.values if isinstance(c_x, ChangeDensityMap) else np.asarray(c_x)
    if vt.shape != vx.shape:
        raise ValueError(f"dimension mismatch: {vt.shape} vs {vx.shape}")
    fused = np.maximum(vt, vx)
    return fused > quantile_threshold(fused, q)


def select_candidates(cands: list[CandidateInstance],
                      keep_fraction: float = DEFAULT_KEEP_FRACTION,
                      ) -> list[CandidateInstance]:
    """Keep the top ceil(keep_fraction * K) candidates by score.

    Ties break deterministically by tile index, then instance id, then
    direction.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    if not cands:
        return []
    ranked = sorted(cands, key=lambda c: (-c.score,) + c.sort_key())
    return ranked[:math.ceil(keep_fraction * len(ranked))]
