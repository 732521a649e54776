"""PNG / JSON export helpers for maps, instances, candidates, and records."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .segment import InstanceMaskSet
from .stage1 import CandidateInstance
from .stage2 import AnomalyScoreRecord


def save_binary_png(mask: np.ndarray, path: str | Path) -> None:
    """1-bit PNG, white = set."""
    Image.fromarray(np.asarray(mask).astype(bool)).convert("1").save(path)


def load_binary_png(path: str | Path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("L"))
    return arr > 127


def save_density_png(values: np.ndarray, path: str | Path) -> None:
    """16-bit grayscale PNG, linearly scaled to the map's own max."""
    v = np.asarray(values, dtype=np.float64)
    peak = v.max()
    scaled = (v / peak * 65535.0) if peak > 0 else np.zeros_like(v)
    Image.fromarray(scaled.astype(np.uint16)).save(path)


def export_instances(mask_set: InstanceMaskSet, png_path: str | Path,
                     json_path: str | Path) -> None:
    """16-bit label-map PNG plus a JSON sidecar of instance records."""
    Image.fromarray(mask_set.label_map.astype(np.uint16)).save(png_path)
    records = [{"id": r.id, "area": r.area, "bbox": list(r.bbox),
                "stability": r.stability} for r in mask_set.instances]
    Path(json_path).write_text(json.dumps(records, indent=2))


def write_candidates_jsonl(cands: list[CandidateInstance], path: str | Path) -> None:
    with open(path, "w") as fh:
        for c in cands:
            fh.write(json.dumps({"tile": c.tile_index, "instance": c.instance_id,
                                 "direction": c.direction, "score": c.score}) + "\n")


def write_records_jsonl(records: list[AnomalyScoreRecord], path: str | Path) -> None:
    with open(path, "w") as fh:
        for r in records:
            cand = r.candidate
            fh.write(json.dumps({
                "candidate": None if cand is None else {
                    "tile": cand.tile_index, "instance": cand.instance_id,
                    "direction": cand.direction, "score": cand.score},
                "distances": list(r.distances),
                "s_a": r.s_a,
                "argmin_step": r.argmin_step,
            }) + "\n")
