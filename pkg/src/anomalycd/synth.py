"""Seeded synthetic time-series scenes with ground truth.

Scenes have a smooth static background, solid "mover" shapes that revisit the
same positions on a short cycle (the recurring, normal changes), a global
brightness offset and Gaussian noise per step, and one anomaly shape present
only in the final step. Generation is deterministic: every random draw comes
from a generator keyed by (seed, purpose, step/object index), so results do
not depend on generation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import SceneError
from .scene import TimeSeriesScene, save_scene

_TAG_BACKGROUND = 0
_TAG_ANOMALY = 1
_TAG_MOVER = 2
_TAG_BRIGHT = 3
_TAG_NOISE = 4
_TAG_CLUTTER = 5


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    size: int = 512
    steps: int = 5
    movers: int = 8
    mover_size: tuple[int, int] = (12, 20)
    # lower bound keeps an inscribed ellipse big enough that a 16x16 seed
    # lattice on a 512px tile always lands at least one seed inside it
    anomaly_size: tuple[int, int] = (48, 52)
    brightness_jitter: float = 0.05
    noise_sigma: float = 0.01
    channels: int = 3
    # static scene clutter: small fixed objects on the smooth base, present
    # identically in every step (structure for the segmenter, zero change)
    clutter: int = 16
    clutter_size: tuple[int, int] = (20, 36)

    def __post_init__(self) -> None:
        # steps == 2 is allowed but degenerate: Stage 2 has a single history
        # step, so recurrence suppression cannot differ from Stage 1
        if self.steps < 2:
            raise ValueError(f"steps must be >= 2, got {self.steps}")
        if self.size < 64:
            raise ValueError(f"size must be >= 64, got {self.size}")


def _rng(cfg: SynthConfig, tag: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, tag, *key])


def _shape_mask(kind: str, size: int) -> np.ndarray:
    if kind == "rect":
        return np.ones((size, size), dtype=bool)
    yy, xx = np.mgrid[0:size, 0:size]
    c = (size - 1) / 2.0
    return ((yy - c) ** 2 + (xx - c) ** 2) <= (size / 2.0) ** 2


def _place(rng: np.random.Generator, size: int, shape_size: int,
           forbidden: np.ndarray | None, attempts: int = 100) -> tuple[int, int]:
    """Top-left corner of a shape_size square avoiding the forbidden mask."""
    for _ in range(attempts):
        y = int(rng.integers(0, size - shape_size + 1))
        x = int(rng.integers(0, size - shape_size + 1))
        if forbidden is None or not forbidden[y:y + shape_size, x:x + shape_size].any():
            return y, x
    raise SceneError(
        f"could not place a {shape_size}px shape clear of the anomaly "
        f"after {attempts} attempts")


@dataclass
class SynthTruth:
    """Generator-side ground truth: schedules and footprints."""

    config: SynthConfig
    movers: list[dict]
    anomaly: dict
    brightness: list[float]
    clutter: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "seed": self.config.seed,
            "size": self.config.size,
            "steps": self.config.steps,
            "movers": self.movers,
            "clutter": self.clutter,
            "anomaly": self.anomaly,
            "brightness": self.brightness,
        }


def _contrast_color(rng: np.random.Generator, base: np.ndarray,
                    y: int, x: int, size: int,
                    lo: float, hi: float) -> list[float]:
    """Per-channel color offset from the local base patch, pushed toward the
    roomier side of the intensity range so clipping cannot wash it out."""
    local = base[y:y + size, x:x + size].reshape(-1, base.shape[2]).mean(axis=0)
    mag = rng.uniform(lo, hi, base.shape[2])
    # one direction for all channels, so the contrast survives in luminance
    direction = 1.0 if local.mean() < 0.5 else -1.0
    return np.clip(local + direction * mag, 0.0, 1.0).tolist()


def _smooth_base(cfg: SynthConfig) -> np.ndarray:
    rng = _rng(cfg, _TAG_BACKGROUND)
    coarse = rng.uniform(0.35, 0.65, (6, 6, cfg.channels))
    zoom = (cfg.size / 6, cfg.size / 6, 1)
    bg = ndimage.zoom(coarse, zoom, order=3, mode="nearest")
    return np.clip(bg[:cfg.size, :cfg.size], 0.0, 1.0)


def _plan(cfg: SynthConfig) -> SynthTruth:
    base = _smooth_base(cfg)

    # anomaly first so mover placement can avoid its footprint
    rng_a = _rng(cfg, _TAG_ANOMALY)
    a_size = int(rng_a.integers(cfg.anomaly_size[0], cfg.anomaly_size[1] + 1))
    a_kind = "rect" if rng_a.random() < 0.5 else "ellipse"
    ay, ax = _place(rng_a, cfg.size, a_size, None)
    # dark, saturated color: well below the base luminance range (so region
    # growing never absorbs it) and with a strongly rotated channel ratio
    a_color = [0.05] * cfg.channels
    a_color[int(rng_a.integers(cfg.channels))] = float(rng_a.uniform(0.2, 0.4))
    anomaly_footprint = np.zeros((cfg.size, cfg.size), dtype=bool)
    anomaly_footprint[ay:ay + a_size, ax:ax + a_size] = _shape_mask(a_kind, a_size)

    movers = []
    for j in range(cfg.movers):
        rng_m = _rng(cfg, _TAG_MOVER, j)
        period = int(rng_m.choice([2, 3]))
        period = min(period, cfg.steps - 1)
        m_size = int(rng_m.integers(cfg.mover_size[0], cfg.mover_size[1] + 1))
        m_kind = "rect" if rng_m.random() < 0.5 else "ellipse"
        positions = [list(_place(rng_m, cfg.size, m_size, anomaly_footprint))
                     for _ in range(period)]
        color = _contrast_color(rng_m, base, positions[0][0], positions[0][1],
                                m_size, 0.25, 0.40)
        movers.append({"id": j, "period": period, "size": m_size,
                       "shape": m_kind, "color": color, "positions": positions})

    clutter = []
    for j in range(cfg.clutter):
        rng_c = _rng(cfg, _TAG_CLUTTER, j)
        c_size = int(rng_c.integers(cfg.clutter_size[0], cfg.clutter_size[1] + 1))
        c_kind = "rect" if rng_c.random() < 0.5 else "ellipse"
        cy, cx = _place(rng_c, cfg.size, c_size, anomaly_footprint)
        color = _contrast_color(rng_c, base, cy, cx, c_size, 0.12, 0.22)
        clutter.append({"id": j, "y": cy, "x": cx, "size": c_size,
                        "shape": c_kind, "color": color})

    brightness = [float(_rng(cfg, _TAG_BRIGHT, t).uniform(
        -cfg.brightness_jitter, cfg.brightness_jitter)) for t in range(cfg.steps)]

    return SynthTruth(
        config=cfg, movers=movers, clutter=clutter, brightness=brightness,
        anomaly={"y": ay, "x": ax, "size": a_size, "shape": a_kind,
                 "color": a_color})


def _background(cfg: SynthConfig, truth: "SynthTruth") -> np.ndarray:
    """Static background: smooth low-frequency base plus fixed clutter."""
    bg = _smooth_base(cfg)
    for c in truth.clutter:
        _draw(bg, c["y"], c["x"], c["shape"], c["size"], c["color"])
    return bg


def _draw(frame: np.ndarray, y: int, x: int, kind: str, size: int,
          color: list[float]) -> None:
    mask = _shape_mask(kind, size)
    frame[y:y + size, x:x + size][mask] = color


def render_clean_steps(cfg: SynthConfig, truth: SynthTruth | None = None,
                       ) -> list[np.ndarray]:
    """Pre-noise, pre-jitter composite frames: background + movers (+ anomaly
    in the final step). Mover footprints at step t and t - period are pixel
    identical here."""
    truth = truth or _plan(cfg)
    bg = _background(cfg, truth)
    frames = []
    for t in range(cfg.steps):
        frame = bg.copy()
        for m in truth.movers:
            y, x = m["positions"][t % m["period"]]
            _draw(frame, y, x, m["shape"], m["size"], m["color"])
        if t == cfg.steps - 1:
            a = truth.anomaly
            _draw(frame, a["y"], a["x"], a["shape"], a["size"], a["color"])
        frames.append(frame)
    return frames


def anomaly_mask(cfg: SynthConfig, truth: SynthTruth) -> np.ndarray:
    a = truth.anomaly
    out = np.zeros((cfg.size, cfg.size), dtype=bool)
    out[a["y"]:a["y"] + a["size"], a["x"]:a["x"] + a["size"]] = \
        _shape_mask(a["shape"], a["size"])
    return out


def generate(cfg: SynthConfig) -> tuple[TimeSeriesScene, SynthTruth]:
    """Deterministically generate a scene plus its truth manifest."""
    truth = _plan(cfg)
    frames = render_clean_steps(cfg, truth)
    steps = []
    for t, frame in enumerate(frames):
        noisy = frame + truth.brightness[t]
        if cfg.noise_sigma > 0:
            noisy = noisy + _rng(cfg, _TAG_NOISE, t).normal(
                0.0, cfg.noise_sigma, frame.shape)
        steps.append(np.clip(noisy, 0.0, 1.0))
    scene = TimeSeriesScene(
        steps=steps,
        timestamps=[f"t{t:02d}" for t in range(cfg.steps)],
        event_id=f"synthetic-{cfg.seed}",
        category="others",
        gt_mask=anomaly_mask(cfg, truth),
    )
    return scene, truth


def generate_directory(cfg: SynthConfig, out_dir: str | Path) -> Path:
    """Generate and write a loadable scene directory plus truth.json."""
    import json

    scene, truth = generate(cfg)
    out_dir = save_scene(scene, out_dir)
    (out_dir / "truth.json").write_text(json.dumps(truth.as_dict(), indent=2))
    return out_dir
