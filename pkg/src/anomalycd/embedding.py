"""Dense tile embeddings, the distance metric, mask projection, and the cache.

All change and anomaly scoring happens on an EmbeddingMap: a h x w grid of
D-dimensional feature vectors at a fixed pixel stride. The reference embedder
below is a hand-crafted, deterministic stand-in for a foundation-model image
encoder, so the full pipeline runs without any model weights; externally
computed embeddings plug in through the binary cache format.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CacheError

STRIDE = 16
METRICS = ("cosine", "l1", "l2")
ORIENT_BINS = 8


@dataclass(frozen=True)
class EmbeddingMap:
    """Row-major grid of feature vectors; data has shape (h, w, D)."""

    data: np.ndarray
    stride: int = STRIDE

    def __post_init__(self) -> None:
        if self.data.ndim != 3 or self.data.shape[2] < 1:
            raise ValueError(f"embedding data must be (h, w, D), got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("embedding contains non-finite values")

    @property
    def h(self) -> int:
        return self.data.shape[0]

    @property
    def w(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class GridMask:
    """Binary membership of embedding grid cells; never empty."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.bits.dtype != bool or self.bits.ndim != 2:
            raise ValueError("GridMask bits must be a 2-D bool array")
        if not self.bits.any():
            raise ValueError("GridMask must have at least one cell set")


def _integral(img: np.ndarray) -> np.ndarray:
    """Summed-area table with a zero first row/column."""
    s = np.cumsum(np.cumsum(img, axis=0), axis=1)
    out = np.zeros((img.shape[0] + 1, img.shape[1] + 1) + img.shape[2:], dtype=np.float64)
    out[1:, 1:] = s
    return out


def _window_stats(sat: np.ndarray, sat2: np.ndarray,
                  y0: np.ndarray, y1: np.ndarray,
                  x0: np.ndarray, x1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population std per window over a (h,) x (w,) rectangle grid."""
    def window_sum(table: np.ndarray) -> np.ndarray:
        return (table[np.ix_(y1, x1)] - table[np.ix_(y0, x1)]
                - table[np.ix_(y1, x0)] + table[np.ix_(y0, x0)])

    area = ((y1 - y0)[:, None] * (x1 - x0)[None, :]).astype(np.float64)
    if sat.ndim == 3:
        area = area[:, :, None]
    mean = window_sum(sat) / area
    var = window_sum(sat2) / area - mean ** 2
    return mean, np.sqrt(np.maximum(var, 0.0))


def _window_sums(table: np.ndarray, y0, y1, x0, x1) -> np.ndarray:
    return (table[np.ix_(y1, x1)] - table[np.ix_(y0, x1)]
            - table[np.ix_(y1, x0)] + table[np.ix_(y0, x0)])


def reference_embed(tile: np.ndarray, stride: int = STRIDE) -> EmbeddingMap:
    """Hand-crafted per-cell features: intensity statistics plus an
    orientation histogram, over the cell footprint and a 2x context window.

    Per cell: [per-channel mean, per-channel std, 8-bin gradient-orientation
    histogram weighted by gradient magnitude on luminance], computed over the
    stride x stride footprint and again over the (2*stride)^2 centered context
    window (edge-clamped). Each cell vector is L2-normalized; an all-zero
    vector is left as zero.
    """
    tile = np.asarray(tile, dtype=np.float64)
    if tile.ndim == 2:
        tile = tile[:, :, None]
    H, W, C = tile.shape
    if H % stride or W % stride:
        raise ValueError(f"tile dims {H}x{W} not divisible by stride {stride}")
    h, w = H // stride, W // stride

    lum = tile.mean(axis=2)
    gy, gx = np.gradient(lum)
    mag = np.hypot(gx, gy)
    ang = np.mod(np.arctan2(gy, gx), 2 * np.pi)
    bins = np.minimum((ang / (2 * np.pi) * ORIENT_BINS).astype(np.int64), ORIENT_BINS - 1)
    # one magnitude plane per orientation bin, so histograms reduce to sums
    hist_planes = np.zeros((H, W, ORIENT_BINS), dtype=np.float64)
    np.put_along_axis(hist_planes, bins[:, :, None], mag[:, :, None], axis=2)

    sat = _integral(tile)
    sat2 = _integral(tile ** 2)
    sat_hist = _integral(hist_planes)

    cells = np.arange(h), np.arange(w)

    def block(y0, y1, x0, x1) -> np.ndarray:
        mean, std = _window_stats(sat, sat2, y0, y1, x0, x1)
        hist = _window_sums(sat_hist, y0, y1, x0, x1)
        return np.concatenate([mean, std, hist], axis=2)

    fy0, fx0 = cells[0] * stride, cells[1] * stride
    foot = block(fy0, fy0 + stride, fx0, fx0 + stride)

    half = stride // 2
    cy0 = np.clip(fy0 - half, 0, H)
    cy1 = np.clip(fy0 + stride + half, 0, H)
    cx0 = np.clip(fx0 - half, 0, W)
    cx1 = np.clip(fx0 + stride + half, 0, W)
    ctx = block(cy0, cy1, cx0, cx1)

    feat = np.concatenate([foot, ctx], axis=2)
    norms = np.linalg.norm(feat, axis=2, keepdims=True)
    feat = np.divide(feat, norms, out=np.zeros_like(feat), where=norms > 0)
    return EmbeddingMap(data=feat.astype(np.float32), stride=stride)


def distance(u: np.ndarray, v: np.ndarray, metric: str = "cosine") -> float:
    """Non-negative distance between two feature vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if metric == "cosine":
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu == 0.0 or nv == 0.0:
            return 0.0
        return float(max(0.0, 1.0 - np.dot(u, v) / (nu * nv)))
    if metric == "l1":
        return float(np.abs(u - v).sum())
    if metric == "l2":
        return float(np.linalg.norm(u - v))
    raise ValueError(f"unknown metric {metric!r}")


def distance_maps(a: np.ndarray, b: np.ndarray, metric: str = "cosine") -> np.ndarray:
    """Vectorized per-cell distance between two (h, w, D) grids."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if metric == "cosine":
        na = np.linalg.norm(a, axis=2)
        nb = np.linalg.norm(b, axis=2)
        dot = np.einsum("ijk,ijk->ij", a, b)
        denom = na * nb
        out = np.where(denom > 0, 1.0 - dot / np.where(denom > 0, denom, 1.0), 0.0)
        return np.maximum(out, 0.0)
    if metric == "l1":
        return np.abs(a - b).sum(axis=2)
    if metric == "l2":
        return np.linalg.norm(a - b, axis=2)
    raise ValueError(f"unknown metric {metric!r}")


def project_mask(mask: np.ndarray, stride: int = STRIDE) -> GridMask:
    """Project a pixel-resolution binary mask onto the embedding grid.

    A cell is set iff at least half of its footprint lies in the mask; if no
    cell qualifies, the single cell containing the mask centroid is set.
    """
    mask = np.asarray(mask).astype(bool)
    if not mask.any():
        raise ValueError("empty mask")
    H, W = mask.shape
    if H % stride or W % stride:
        raise ValueError(f"mask dims {H}x{W} not divisible by stride {stride}")
    h, w = H // stride, W // stride
    counts = mask.reshape(h, stride, w, stride).sum(axis=(1, 3))
    bits = counts * 2 >= stride * stride
    if not bits.any():
        ys, xs = np.nonzero(mask)
        cy = int(ys.mean()) // stride
        cx = int(xs.mean()) // stride
        bits = np.zeros((h, w), dtype=bool)
        bits[cy, cx] = True
    return GridMask(bits=bits)


def mask_mean_embedding(emb: EmbeddingMap, gm: GridMask) -> np.ndarray:
    """Arithmetic mean of the member cells' vectors."""
    if gm.bits.shape != (emb.h, emb.w):
        raise ValueError(
            f"grid mismatch: mask {gm.bits.shape} vs embedding {(emb.h, emb.w)}")
    return emb.data[gm.bits].astype(np.float64).mean(axis=0)


# ---------------------------------------------------------------------------
# Binary cache format (.aecd), little-endian:
#   magic 'AECD' | version u16 = 1 | dtype u8 = 0 (f32) | stride u16
#   | D u32 | h u32 | w u32 | payload D*h*w f32 (row-major cells, D
#   contiguous per cell) | CRC32 of payload u32
# ---------------------------------------------------------------------------

_MAGIC = b"AECD"
_VERSION = 1
_DTYPE_F32 = 0
_HEADER = struct.Struct("<4sHBHIII")


def write_cache(emb: EmbeddingMap, path: str | Path) -> None:
    payload = np.ascontiguousarray(emb.data, dtype="<f4").tobytes()
    header = _HEADER.pack(_MAGIC, _VERSION, _DTYPE_F32, emb.stride,
                          emb.dim, emb.h, emb.w)
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    Path(path).write_bytes(header + payload + struct.pack("<I", crc))


def read_cache(path: str | Path) -> EmbeddingMap:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size + 4:
        raise CacheError(f"truncated cache file {path}")
    magic, version, dtype, stride, dim, h, w = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise CacheError(f"bad magic in {path}")
    if version != _VERSION:
        raise CacheError(f"unsupported cache version {version}")
    if dtype != _DTYPE_F32:
        raise CacheError(f"unsupported cache dtype {dtype}")
    n = dim * h * w * 4
    if len(raw) != _HEADER.size + n + 4:
        raise CacheError(f"truncated cache file {path}")
    payload = raw[_HEADER.size:_HEADER.size + n]
    (crc,) = struct.unpack_from("<I", raw, _HEADER.size + n)
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise CacheError(f"checksum mismatch in {path}")
    data = np.frombuffer(payload, dtype="<f4").reshape(h, w, dim)
    return EmbeddingMap(data=np.ascontiguousarray(data), stride=stride)


def cache_filename(timestamp: str, tile_x0: int, tile_y0: int) -> str:
    return f"{timestamp}_{tile_x0}_{tile_y0}.aecd"
