import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anomalycd import (SceneError, TileSpec, TilingError, TimeSeriesScene,
                       extract_tile, load_scene, plan_tiles, save_scene, stitch)
from anomalycd.scene import as_raster


def test_as_raster_promotes_2d():
    a = as_raster(np.zeros((4, 5)))
    assert a.shape == (4, 5, 1)
    assert a.dtype == np.float64


def test_as_raster_rejects_nan():
    with pytest.raises(SceneError, match="non-finite"):
        as_raster(np.full((4, 4), np.nan))


def test_as_raster_rejects_bad_rank():
    with pytest.raises(SceneError):
        as_raster(np.zeros((2, 2, 2, 2)))


def test_scene_requires_two_steps():
    with pytest.raises(SceneError, match="insufficient time steps"):
        TimeSeriesScene(steps=[np.zeros((8, 8))], timestamps=["a"])


def test_scene_rejects_shape_mismatch():
    with pytest.raises(SceneError, match="dimension mismatch"):
        TimeSeriesScene(steps=[np.zeros((8, 8)), np.zeros((8, 9))],
                        timestamps=["a", "b"])


def test_scene_rejects_bad_gt_shape():
    with pytest.raises(SceneError, match="dimension mismatch"):
        TimeSeriesScene(steps=[np.zeros((8, 8))] * 2, timestamps=["a", "b"],
                        gt_mask=np.zeros((4, 4), dtype=bool))


def test_scene_history_order():
    steps = [np.full((8, 8), v) for v in (0.1, 0.2, 0.3, 0.4)]
    scene = TimeSeriesScene(steps=steps, timestamps=list("abcd"))
    assert scene.n_history == 3
    assert scene.current[0, 0, 0] == pytest.approx(0.4)
    # history is most recent first
    assert [h[0, 0, 0] for h in scene.history] == pytest.approx([0.3, 0.2, 0.1])


def test_plan_tiles_exact_fit():
    tiles = plan_tiles(4096, 2048, 2048)
    assert len(tiles) == 2
    assert all(t.pad_right == 0 and t.pad_bottom == 0 for t in tiles)
    assert tiles[1].y0 == 2048


def test_plan_tiles_counts_and_padding():
    # 6160x6111 at 2048: 4 rows x 3 cols, bottom row mostly padding
    tiles = plan_tiles(6160, 6111, 2048)
    assert len(tiles) == 12
    last = tiles[-1]
    assert (last.y0, last.x0) == (6144, 4096)
    assert last.pad_bottom == 2032
    assert last.pad_right == 33
    assert last.height == 16 and last.width == 2015


def test_plan_tiles_row_major():
    tiles = plan_tiles(200, 300, 100)
    assert [(t.y0, t.x0) for t in tiles] == [
        (0, 0), (0, 100), (0, 200), (100, 0), (100, 100), (100, 200)]


def test_plan_tiles_rejects_tiny_tile():
    with pytest.raises(TilingError):
        plan_tiles(100, 100, 32)


def test_extract_tile_replicates_edges():
    raster = np.arange(100, dtype=np.float64).reshape(10, 10, 1)
    spec = TileSpec(x0=8, y0=8, size=4, pad_right=2, pad_bottom=2)
    tile = extract_tile(raster, spec)
    assert tile.shape == (4, 4, 1)
    assert tile[0, 0, 0] == raster[8, 8, 0]
    # replicated corner repeats the last real pixel
    assert tile[3, 3, 0] == raster[9, 9, 0]
    assert tile[0, 3, 0] == raster[8, 9, 0]


def test_stitch_rejects_duplicate():
    spec = TileSpec(x0=0, y0=0, size=64)
    with pytest.raises(TilingError, match="duplicate"):
        stitch([(spec, np.zeros((64, 64))), (spec, np.zeros((64, 64)))], 64, 64)


def test_stitch_rejects_missing():
    spec = TileSpec(x0=0, y0=0, size=64)
    with pytest.raises(TilingError, match="incomplete"):
        stitch([(spec, np.zeros((64, 64)))], 64, 128)


def test_stitch_rejects_empty():
    with pytest.raises(TilingError):
        stitch([], 10, 10)


def test_stitch_order_independent(rng):
    raster = rng.random((150, 130))
    tiles = plan_tiles(150, 130, 64)
    pieces = [(t, extract_tile(raster, t)) for t in tiles]
    fwd = stitch(pieces, 150, 130)
    rev = stitch(pieces[::-1], 150, 130)
    assert np.array_equal(fwd, rev)
    assert np.array_equal(fwd, raster)


@settings(max_examples=25, deadline=None)
@given(h=st.integers(65, 300), w=st.integers(65, 300),
       ts=st.sampled_from([64, 100, 128]), seed=st.integers(0, 2**32 - 1))
def test_tile_stitch_roundtrip_property(h, w, ts, seed):
    raster = np.random.default_rng(seed).random((h, w, 2))
    tiles = plan_tiles(h, w, ts)
    assert len(tiles) == -(-h // ts) * -(-w // ts)
    out = stitch([(t, extract_tile(raster, t)) for t in tiles], h, w)
    assert np.array_equal(out, raster)


def test_scene_directory_roundtrip(tmp_path, small_scene):
    out = save_scene(small_scene, tmp_path / "scene")
    loaded = load_scene(out)
    assert loaded.event_id == small_scene.event_id
    assert loaded.category == small_scene.category
    assert loaded.timestamps == small_scene.timestamps
    assert np.array_equal(loaded.gt_mask, small_scene.gt_mask)
    # 8-bit quantization bounds the round-trip error
    for a, b in zip(loaded.steps, small_scene.steps):
        assert np.abs(a - b).max() <= 0.5 / 255.0 + 1e-12


def test_load_scene_sorts_by_timestamp(tmp_path, small_scene):
    out = save_scene(small_scene, tmp_path / "scene")
    import json
    mpath = out / "manifest.json"
    manifest = json.loads(mpath.read_text())
    manifest["steps"] = manifest["steps"][::-1]
    mpath.write_text(json.dumps(manifest))
    loaded = load_scene(out)
    assert loaded.timestamps == sorted(loaded.timestamps)


def test_load_scene_missing_manifest(tmp_path):
    with pytest.raises(SceneError, match="manifest"):
        load_scene(tmp_path)
