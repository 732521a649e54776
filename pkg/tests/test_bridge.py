"""Cross-implementation checks for the embedding cache bridge in frontend/.

Skipped when node or the built bridge (frontend/dist) is unavailable; the rest
of the suite does not depend on it.
"""

import shutil
import subprocess
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from anomalycd import (EmbeddingMap, RunConfig, SynthConfig, detect,
                       generate_directory, load_scene, read_cache, write_cache)

FRONTEND = Path(__file__).resolve().parent.parent / "frontend"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not (FRONTEND / "dist" / "cli.js").is_file(),
    reason="node or the built encoder bridge is unavailable")


@pytest.fixture(scope="module")
def exported(tmp_path_factory):
    scene_dir = tmp_path_factory.mktemp("scene")
    cache_dir = tmp_path_factory.mktemp("cache")
    generate_directory(SynthConfig(seed=0, size=256), scene_dir)
    subprocess.run(
        ["node", str(FRONTEND / "dist" / "cli.js"), "--scene", str(scene_dir),
         "--tile", "256", "--out", str(cache_dir)],
        check=True, capture_output=True, text=True)
    return scene_dir, cache_dir


def test_exported_files_load(exported):
    _, cache_dir = exported
    files = sorted(cache_dir.glob("*.aecd"))
    assert len(files) == 5
    for path in files:
        emb = read_cache(path)  # validates magic, dims, CRC
        assert emb.h * emb.stride == 256
        assert emb.dim == 8
        assert np.all(np.isfinite(emb.data))


def test_roundtrip_bridge_to_engine_bitwise(exported, tmp_path):
    # re-serializing a bridge file through the engine writer reproduces it
    _, cache_dir = exported
    src = sorted(cache_dir.glob("*.aecd"))[0]
    emb = read_cache(src)
    out = tmp_path / "rewritten.aecd"
    write_cache(emb, out)
    assert out.read_bytes() == src.read_bytes()


def test_roundtrip_engine_to_bridge_bitwise(tmp_path):
    # and the bridge reproduces a file written by the engine
    rng = np.random.default_rng(9)
    emb = EmbeddingMap(data=rng.random((4, 4, 8)).astype(np.float32), stride=16)
    src = tmp_path / "engine.aecd"
    write_cache(emb, src)
    script = (
        "const {decodeAecd, encodeAecd} = require(process.argv[1]);"
        "const fs = require('fs');"
        "const grid = decodeAecd(fs.readFileSync(process.argv[2]));"
        "fs.writeFileSync(process.argv[3], encodeAecd(grid));")
    out = tmp_path / "bridge.aecd"
    subprocess.run(
        ["node", "-e", script, str(FRONTEND / "dist" / "aecd.js"),
         str(src), str(out)],
        check=True, capture_output=True, text=True)
    assert out.read_bytes() == src.read_bytes()


def test_detect_runs_on_bridge_embeddings(exported):
    scene_dir, cache_dir = exported
    scene = load_scene(scene_dir)
    cfg = RunConfig(tile_size=256, workers=1, embedder="cache",
                    cache_dir=str(cache_dir))
    result = detect(scene, cfg)
    assert result.anomaly_map.shape == (256, 256)
    assert len(result.all_candidates) > 0
