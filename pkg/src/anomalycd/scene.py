"""Aligned time-series raster scenes, gigapixel tile planning, and stitching.

Rasters are numpy arrays of shape (H, W, C) with float intensities in [0, 1].
A scene is an ordered stack of such rasters: index 0 is the oldest historical
acquisition, the last entry is the current image under inspection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import SceneError, TilingError

CATEGORIES = ("explosion", "collapse", "landslide", "fire", "dam_break", "others")

DEFAULT_TILE_SIZE = 2048


def as_raster(arr: np.ndarray) -> np.ndarray:
    """Validate and canonicalize a raster to float64 (H, W, C)."""
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3:
        raise SceneError(f"raster must be 2-D or 3-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise SceneError("raster contains non-finite values")
    return a


@dataclass(frozen=True)
class TileSpec:
    """One non-overlapped tile; edge tiles carry replication padding."""

    x0: int
    y0: int
    size: int
    pad_right: int = 0
    pad_bottom: int = 0

    @property
    def width(self) -> int:
        """Unpadded footprint width in the source image."""
        return self.size - self.pad_right

    @property
    def height(self) -> int:
        return self.size - self.pad_bottom


@dataclass
class TimeSeriesScene:
    """Ordered, pixel-aligned raster stack {T_n ... T_1, X}."""

    steps: list[np.ndarray]
    timestamps: list[str]
    event_id: str = "unnamed"
    category: str = "others"
    gt_mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        if len(self.steps) < 2:
            raise SceneError("insufficient time steps: need at least 2")
        if len(self.timestamps) != len(self.steps):
            raise SceneError("one timestamp required per step")
        if self.category not in CATEGORIES:
            raise SceneError(f"unknown category {self.category!r}")
        self.steps = [as_raster(s) for s in self.steps]
        shape = self.steps[0].shape
        for i, s in enumerate(self.steps):
            if s.shape != shape:
                raise SceneError(
                    f"dimension mismatch: step {i} has shape {s.shape}, "
                    f"expected {shape}"
                )
        if self.gt_mask is not None:
            gm = np.asarray(self.gt_mask).astype(bool)
            if gm.shape != shape[:2]:
                raise SceneError(
                    f"dimension mismatch: gt_mask shape {gm.shape} vs raster {shape[:2]}"
                )
            self.gt_mask = gm

    @property
    def height(self) -> int:
        return self.steps[0].shape[0]

    @property
    def width(self) -> int:
        return self.steps[0].shape[1]

    @property
    def channels(self) -> int:
        return self.steps[0].shape[2]

    @property
    def current(self) -> np.ndarray:
        """X, the newest image."""
        return self.steps[-1]

    @property
    def history(self) -> list[np.ndarray]:
        """T_1 .. T_n ordered most recent first."""
        return list(reversed(self.steps[:-1]))

    @property
    def n_history(self) -> int:
        return len(self.steps) - 1


def plan_tiles(height: int, width: int, tile_size: int = DEFAULT_TILE_SIZE) -> list[TileSpec]:
    """Partition an image into non-overlapped tiles, row-major.

    Edge tiles are replication-padded on the right/bottom so every tile is
    exactly tile_size x tile_size.
    """
    if tile_size < 64:
        raise TilingError(f"tile_size must be >= 64, got {tile_size}")
    if height < 1 or width < 1:
        raise TilingError("image dimensions must be positive")
    rows = math.ceil(height / tile_size)
    cols = math.ceil(width / tile_size)
    tiles = []
    for r in range(rows):
        y0 = r * tile_size
        pad_bottom = max(0, y0 + tile_size - height)
        for c in range(cols):
            x0 = c * tile_size
            pad_right = max(0, x0 + tile_size - width)
            tiles.append(TileSpec(x0=x0, y0=y0, size=tile_size,
                                  pad_right=pad_right, pad_bottom=pad_bottom))
    return tiles


def extract_tile(raster: np.ndarray, spec: TileSpec) -> np.ndarray:
    """Crop a tile, applying edge replication for boundary tiles."""
    crop = raster[spec.y0:spec.y0 + spec.height, spec.x0:spec.x0 + spec.width]
    if spec.pad_right or spec.pad_bottom:
        pad = [(0, spec.pad_bottom), (0, spec.pad_right)] + [(0, 0)] * (raster.ndim - 2)
        crop = np.pad(crop, pad, mode="edge")
    return crop


def stitch(tile_outputs: list[tuple[TileSpec, np.ndarray]],
           height: int, width: int) -> np.ndarray:
    """Reassemble per-tile maps into one scene-sized map.

    Padded regions are discarded. The result is independent of list order;
    missing or duplicate tiles raise.
    """
    if not tile_outputs:
        raise TilingError("incomplete coverage: no tiles supplied")
    out = None
    covered = np.zeros((height, width), dtype=bool)
    for spec, tile_map in tile_outputs:
        tile_map = np.asarray(tile_map)
        if tile_map.shape[:2] != (spec.size, spec.size):
            raise TilingError(
                f"tile map shape {tile_map.shape[:2]} != tile size {spec.size}")
        if out is None:
            out = np.zeros((height, width) + tile_map.shape[2:], dtype=tile_map.dtype)
        ys = slice(spec.y0, spec.y0 + spec.height)
        xs = slice(spec.x0, spec.x0 + spec.width)
        if covered[ys, xs].any():
            raise TilingError(f"duplicate tile at ({spec.x0}, {spec.y0})")
        covered[ys, xs] = True
        out[ys, xs] = tile_map[:spec.height, :spec.width]
    if not covered.all():
        raise TilingError("incomplete coverage: missing tile")
    return out


# ---------------------------------------------------------------------------
# Scene directory I/O
#
# Layout: <event_id>/manifest.json with
#   {event_id, category, steps: [{timestamp, file}], gt_mask?}
# Images are 8- or 16-bit PNG/TIFF; the gt mask is a single-channel PNG with
# 0 = normal, 255 = anomaly. Intensities are normalized to [0, 1] on load.
# ---------------------------------------------------------------------------

def _load_image(path: Path) -> np.ndarray:
    try:
        img = Image.open(path)
        arr = np.asarray(img)
    except Exception as exc:
        raise SceneError(f"unreadable image {path}: {exc}") from exc
    if arr.dtype == np.uint8:
        data = arr.astype(np.float64) / 255.0
    elif arr.dtype in (np.uint16, np.int32):
        data = arr.astype(np.float64) / 65535.0
    else:
        data = arr.astype(np.float64)
    return as_raster(data)


def load_scene(scene_dir: str | Path) -> TimeSeriesScene:
    """Load a scene directory; steps are sorted ascending by timestamp."""
    scene_dir = Path(scene_dir)
    manifest_path = scene_dir / "manifest.json"
    if not manifest_path.is_file():
        raise SceneError(f"no manifest.json in {scene_dir}")
    manifest = json.loads(manifest_path.read_text())
    entries = manifest.get("steps", [])
    if len(entries) < 2:
        raise SceneError("insufficient time steps: manifest lists fewer than 2")
    entries = sorted(entries, key=lambda e: str(e["timestamp"]))
    steps = [_load_image(scene_dir / e["file"]) for e in entries]
    gt = None
    if manifest.get("gt_mask"):
        gt_arr = np.asarray(Image.open(scene_dir / manifest["gt_mask"]))
        if gt_arr.ndim == 3:
            gt_arr = gt_arr[:, :, 0]
        gt = gt_arr > (np.iinfo(gt_arr.dtype).max // 2 if gt_arr.dtype.kind == "u" else 0)
    return TimeSeriesScene(
        steps=steps,
        timestamps=[str(e["timestamp"]) for e in entries],
        event_id=manifest.get("event_id", scene_dir.name),
        category=manifest.get("category", "others"),
        gt_mask=gt,
    )


def save_scene(scene: TimeSeriesScene, out_dir: str | Path) -> Path:
    """Write a scene in the loadable directory layout (8-bit PNGs)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for ts, step in zip(scene.timestamps, scene.steps):
        fname = f"{ts}.png"
        arr = np.clip(np.round(step * 255.0), 0, 255).astype(np.uint8)
        if arr.shape[2] == 1:
            arr = arr[:, :, 0]
        Image.fromarray(arr).save(out_dir / fname)
        entries.append({"timestamp": ts, "file": fname})
    manifest = {
        "event_id": scene.event_id,
        "category": scene.category,
        "steps": entries,
    }
    if scene.gt_mask is not None:
        Image.fromarray(np.where(scene.gt_mask, 255, 0).astype(np.uint8)).save(
            out_dir / "gt_mask.png")
        manifest["gt_mask"] = "gt_mask.png"
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return out_dir
