import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anomalycd import (CandidateInstance, ChangeDensityMap, change_score,
                       direction_density, fuse_binarize, quantile_threshold,
                       reference_embed, select_candidates)
from anomalycd.embedding import GridMask, distance, mask_mean_embedding


def _cand(score, tile=0, inst=1, direction="from_T1"):
    return CandidateInstance(tile_index=tile, instance_id=inst,
                             direction=direction, score=score,
                             tile_mask=np.ones((4, 4), dtype=bool))


def test_density_map_rejects_negative():
    with pytest.raises(ValueError):
        ChangeDensityMap(values=np.full((4, 4), -1.0))


def test_density_map_rejects_nan():
    with pytest.raises(ValueError):
        ChangeDensityMap(values=np.full((4, 4), np.nan))


def test_change_score_matches_manual(rng):
    t = rng.random((64, 64, 3))
    x = rng.random((64, 64, 3))
    f_t, f_x = reference_embed(t), reference_embed(x)
    bits = np.zeros((4, 4), dtype=bool)
    bits[1:3, 1:3] = True
    gm = GridMask(bits=bits)
    expect = distance(mask_mean_embedding(f_t, gm), mask_mean_embedding(f_x, gm))
    assert change_score(gm, f_t, f_x) == pytest.approx(expect, abs=1e-12)


def test_change_score_zero_on_identical(rng):
    t = rng.random((64, 64, 3))
    f = reference_embed(t)
    gm = GridMask(bits=np.ones((4, 4), dtype=bool))
    assert change_score(gm, f, f) == pytest.approx(0.0, abs=1e-9)


def test_change_score_grid_mismatch(rng):
    f_a = reference_embed(rng.random((64, 64, 3)))
    f_b = reference_embed(rng.random((32, 32, 3)))
    with pytest.raises(ValueError, match="grid mismatch"):
        change_score(GridMask(bits=np.ones((4, 4), dtype=bool)), f_a, f_b)


def test_direction_density_paints_instance_scores(rng):
    t = np.full((64, 64, 3), 0.6)
    x = t.copy()
    x[16:48, 16:48] = 0.1  # appears in X only
    dens, cands = direction_density(t, x, "X", segment_params={"grid": 4})
    assert dens.values.shape == (64, 64)
    for c in cands:
        assert c.direction == "from_X"
        painted = dens.values[c.tile_mask]
        # overlapping later instances can only raise, never lower, a pixel
        assert (painted >= 0).all()
    # the appeared square must carry a strictly positive score
    assert dens.values[32, 32] > 0


def test_direction_density_rejects_bad_direction(rng):
    t = rng.random((64, 64, 3))
    with pytest.raises(ValueError, match="masks_from"):
        direction_density(t, t, "Y")


def test_direction_density_rejects_shape_mismatch(rng):
    with pytest.raises(ValueError, match="dimension mismatch"):
        direction_density(rng.random((64, 64, 3)), rng.random((64, 32, 3)), "T1")


def test_quantile_threshold_oracle():
    values = np.arange(100, dtype=np.float64)
    # floor(0.94 * 99) = 93
    assert quantile_threshold(values, 0.94) == 93.0
    assert quantile_threshold(values, 0.5) == 49.0


def test_quantile_threshold_unsorted_input(rng):
    values = rng.permutation(np.arange(50, dtype=np.float64))
    assert quantile_threshold(values, 0.9) == float(np.sort(values)[
        math.floor(0.9 * 49)])


def test_quantile_threshold_rejects_out_of_range():
    for q in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            quantile_threshold(np.arange(10.0), q)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 5000), q=st.floats(0.01, 0.99), seed=st.integers(0, 2**16))
def test_binarize_count_exact_for_distinct_values(n, q, seed):
    # with all-distinct values, strict > keeps exactly the ranks above the cut
    values = np.random.default_rng(seed).permutation(n).astype(np.float64)
    thresh = quantile_threshold(values, q)
    assert np.count_nonzero(values > thresh) == n - 1 - math.floor(q * (n - 1))


def test_fuse_binarize_is_pixelwise_max(rng):
    a = rng.random((32, 32))
    b = rng.random((32, 32))
    fused = np.maximum(a, b)
    out = fuse_binarize(a, b, 0.9)
    assert np.array_equal(out, fused > quantile_threshold(fused, 0.9))


def test_fuse_binarize_strictly_above():
    a = np.zeros((10, 10))
    a[0, 0] = 1.0
    # threshold is 0 (94th-rank value); only the strictly positive pixel is set
    out = fuse_binarize(a, np.zeros_like(a), 0.94)
    assert out.sum() == 1 and out[0, 0]


def test_fuse_binarize_shape_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        fuse_binarize(np.zeros((4, 4)), np.zeros((4, 5)))


def test_select_candidates_count_is_ceil():
    cands = [_cand(s, inst=i + 1) for i, s in enumerate(np.linspace(0, 1, 10))]
    assert len(select_candidates(cands, 0.30)) == 3
    assert len(select_candidates(cands, 0.31)) == 4
    assert len(select_candidates(cands, 1.0)) == 10
    assert len(select_candidates(cands[:1], 0.01)) == 1


def test_select_candidates_keeps_highest():
    cands = [_cand(0.1, inst=1), _cand(0.9, inst=2), _cand(0.5, inst=3)]
    kept = select_candidates(cands, 0.33)
    assert [c.instance_id for c in kept] == [2]


def test_select_candidates_deterministic_tiebreak():
    cands = [_cand(0.5, tile=1, inst=1), _cand(0.5, tile=0, inst=2),
             _cand(0.5, tile=0, inst=1, direction="from_X"),
             _cand(0.5, tile=0, inst=1)]
    kept = select_candidates(cands, 1.0)
    order = [(c.tile_index, c.instance_id, c.direction) for c in kept]
    assert order == [(0, 1, "from_T1"), (0, 1, "from_X"), (0, 2, "from_T1"),
                     (1, 1, "from_T1")]


def test_select_candidates_empty():
    assert select_candidates([], 0.3) == []


def test_select_candidates_rejects_bad_fraction():
    with pytest.raises(ValueError):
        select_candidates([_cand(0.5)], 0.0)
