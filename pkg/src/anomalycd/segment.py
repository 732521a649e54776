"""Class-agnostic instance proposals via grid-seeded region growing.

Stands in for a promptable neural segmenter: seeds on a uniform lattice, BFS
flood fill on luminance with a running-mean admission rule, and a stability
score from re-growing each seed at a tightened and a loosened threshold.
Fully deterministic for a given tile and parameter set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

DEFAULT_GRID = 16
DEFAULT_MIN_AREA = 64
DEFAULT_STABILITY_MIN = 0.4
DEFAULT_GROW_THRESHOLD = 0.08


@dataclass(frozen=True)
class InstanceRecord:
    id: int
    area: int
    bbox: tuple[int, int, int, int]  # (y0, x0, y1, x1), exclusive upper
    stability: float


@dataclass
class InstanceMaskSet:
    """Label map (0 = unassigned, k >= 1 = instance k) plus per-instance records."""

    label_map: np.ndarray
    instances: list[InstanceRecord]

    def mask_of(self, instance_id: int) -> np.ndarray:
        return self.label_map == instance_id


def _grow_py(lum, blocked, sy, sx, theta, region):
    H, W = lum.shape
    qy = np.empty(H * W, dtype=np.int32)
    qx = np.empty(H * W, dtype=np.int32)
    qy[0], qx[0] = sy, sx
    head, tail = 0, 1
    region[sy, sx] = True
    total = lum[sy, sx]
    count = 1
    while head < tail:
        y, x = qy[head], qx[head]
        head += 1
        mean = total / count
        for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            ny, nx = y + dy, x + dx
            if 0 <= ny < H and 0 <= nx < W and not region[ny, nx] \
                    and not blocked[ny, nx] and abs(lum[ny, nx] - mean) <= theta:
                region[ny, nx] = True
                total += lum[ny, nx]
                count += 1
                qy[tail], qx[tail] = ny, nx
                tail += 1
    return count


if njit is not None:
    _grow = njit(cache=True)(_grow_py)
else:  # pragma: no cover
    _grow = _grow_py


def segment(tile: np.ndarray,
            grid: int = DEFAULT_GRID,
            min_area: int = DEFAULT_MIN_AREA,
            stability_min: float = DEFAULT_STABILITY_MIN,
            grow_threshold: float = DEFAULT_GROW_THRESHOLD) -> InstanceMaskSet:
    """Segment a tile into disjoint instances.

    Seeds sit on a uniform grid x grid lattice and are processed in raster-scan
    order; a claimed seed is skipped. Each region grows by BFS admitting
    4-neighbors whose luminance is within grow_threshold of the running region
    mean. Stability is |region at 0.9*theta| / |region at 1.1*theta| clamped to
    [0, 1]; regions below min_area or stability_min are discarded (their pixels
    stay claimed but unlabeled). Survivors are relabeled densely in seed order.
    """
    if grid < 1:
        raise ValueError(f"grid must be >= 1, got {grid}")
    tile = np.asarray(tile, dtype=np.float64)
    lum = tile.mean(axis=2) if tile.ndim == 3 else tile
    H, W = lum.shape
    seeds = [(int((i + 0.5) * H / grid), int((j + 0.5) * W / grid))
             for i in range(grid) for j in range(grid)]

    claimed = np.zeros((H, W), dtype=bool)
    label_map = np.zeros((H, W), dtype=np.int32)
    records: list[InstanceRecord] = []
    scratch = np.zeros((H, W), dtype=bool)

    for sy, sx in seeds:
        if claimed[sy, sx]:
            continue
        region = np.zeros((H, W), dtype=bool)
        area = _grow(lum, claimed, sy, sx, grow_threshold, region)

        scratch[:] = False
        tight = _grow(lum, claimed, sy, sx, grow_threshold * 0.9, scratch)
        scratch[:] = False
        loose = _grow(lum, claimed, sy, sx, grow_threshold * 1.1, scratch)
        stability = min(1.0, tight / loose)

        claimed |= region
        if area < min_area or stability < stability_min:
            continue
        ys, xs = np.nonzero(region)
        records.append(InstanceRecord(
            id=len(records) + 1,
            area=int(area),
            bbox=(int(ys.min()), int(xs.min()), int(ys.max()) + 1, int(xs.max()) + 1),
            stability=float(stability),
        ))
        label_map[region] = records[-1].id

    return InstanceMaskSet(label_map=label_map, instances=records)


def masks_at_pixel(mask_set: InstanceMaskSet, x: int, y: int) -> int | None:
    """Instance id covering pixel (x, y), or None if unassigned."""
    H, W = mask_set.label_map.shape
    if not (0 <= y < H and 0 <= x < W):
        raise IndexError(f"pixel ({x}, {y}) out of bounds for {W}x{H}")
    label = int(mask_set.label_map[y, x])
    return label if label else None
