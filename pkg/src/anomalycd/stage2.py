"""Stage 2: suppress recurring changes by comparing against all of history.

Each surviving Stage-1 candidate keeps its grid mask fixed across time steps;
its mean embedding in the current image is compared against the same location
in every historical step, and the anomaly score is the minimum of those
distances. A change that matches any historical state therefore scores near
zero, while a genuinely new state keeps a high score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingMap, distance, mask_mean_embedding, project_mask
from .stage1 import CandidateInstance, quantile_threshold


@dataclass(frozen=True)
class AnomalyScoreRecord:
    """Per-candidate distances to every history step and their minimum.

    distances[0] is d_1 (most recent historical step); argmin_step is 1-based
    over that ordering.
    """

    distances: tuple[float, ...]
    s_a: float
    argmin_step: int
    candidate: CandidateInstance | None = None


def anomaly_score(x_vec: np.ndarray, history: list[np.ndarray],
                  metric: str = "cosine",
                  candidate: CandidateInstance | None = None) -> AnomalyScoreRecord:
    """Minimum distance from the current embedding to any historical one."""
    if not history:
        raise ValueError("empty history")
    dists = tuple(distance(x_vec, t, metric) for t in history)
    idx = int(np.argmin(dists))
    return AnomalyScoreRecord(distances=dists, s_a=dists[idx],
                              argmin_step=idx + 1, candidate=candidate)


def score_candidates(candidates: list[CandidateInstance],
                     step_embeddings, metric: str = "cosine",
                     ) -> list[AnomalyScoreRecord]:
    """Score each candidate against every history step.

    step_embeddings(step_index, tile_index) must return the EmbeddingMap of
    that tile at that scene step (step 0 = oldest, last = current image); it is
    typically a lazy, memoized provider so history embeddings are only computed
    for tiles that contain candidates. Raises if any step is unavailable.
    """
    records = []
    for cand in candidates:
        x_emb: EmbeddingMap = step_embeddings(-1, cand.tile_index)
        gm = project_mask(cand.tile_mask, stride=x_emb.stride)
        x_vec = mask_mean_embedding(x_emb, gm)
        n_steps = step_embeddings.n_steps
        history_vecs = []
        for step in range(n_steps - 2, -1, -1):  # t_1 (most recent) .. t_n
            emb = step_embeddings(step, cand.tile_index)
            history_vecs.append(mask_mean_embedding(emb, gm))
        records.append(anomaly_score(x_vec, history_vecs, metric, candidate=cand))
    return records


def paint_anomalies(records: list[AnomalyScoreRecord],
                    scene_shape: tuple[int, int],
                    tile_specs) -> np.ndarray:
    """Paint each candidate's pixels with its anomaly score (max on overlap)."""
    out = np.zeros(scene_shape, dtype=np.float64)
    for rec in records:
        cand = rec.candidate
        if cand is None:
            raise ValueError("record has no candidate reference")
        spec = tile_specs[cand.tile_index]
        local = cand.tile_mask[:spec.height, :spec.width]
        ys = slice(spec.y0, spec.y0 + spec.height)
        xs = slice(spec.x0, spec.x0 + spec.width)
        region = out[ys, xs]
        out[ys, xs] = np.where(local, np.maximum(region, rec.s_a), region)
    return out


def binarize_anomalies(records: list[AnomalyScoreRecord],
                       scene_shape: tuple[int, int],
                       tile_specs, q: float = 0.94) -> np.ndarray:
    """Rank-quantile binarization of the painted anomaly score map."""
    if not records:
        return np.zeros(scene_shape, dtype=bool)
    painted = paint_anomalies(records, scene_shape, tile_specs)
    return painted > quantile_threshold(painted, q)
