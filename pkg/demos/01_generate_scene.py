"""Generate a synthetic time-series scene and inspect its ground truth.

A scene is an ordered stack of aligned rasters. The generator plants solid
"mover" shapes that revisit the same spots on a short cycle (recurring, normal
changes), static clutter, global brightness jitter, sensor noise, and one
anomaly shape that exists only in the final image.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from anomalycd import SynthConfig, generate_directory, load_scene

out_dir = Path(tempfile.mkdtemp(prefix="anomalycd-demo-")) / "scene-0"
cfg = SynthConfig(seed=0, size=512, steps=5, movers=8)
generate_directory(cfg, out_dir)
print(f"wrote scene to {out_dir}")
print("files:", sorted(p.name for p in out_dir.iterdir()))

scene = load_scene(out_dir)
print(f"\nloaded {scene.event_id}: {len(scene.steps)} steps of "
      f"{scene.height}x{scene.width}x{scene.channels}")
print(f"history depth: {scene.n_history} (most recent first)")
print(f"ground-truth anomaly pixels: {np.count_nonzero(scene.gt_mask)}")

truth = json.loads((out_dir / "truth.json").read_text())
a = truth["anomaly"]
print(f"\nanomaly: {a['shape']} of {a['size']}px at ({a['y']}, {a['x']})")
for m in truth["movers"][:3]:
    print(f"mover {m['id']}: period {m['period']}, positions {m['positions']}")
print("...")
