"""Zero-shot anomaly change detection for time-series remote-sensing rasters.

Two-stage pipeline: Stage 1 detects all bi-temporal changes between the
current image and the most recent historical one in an embedding space;
Stage 2 compares each surviving change against every historical step and keeps
only those matching no historical state. Includes label-free baselines,
weighted-precision evaluation, and a seeded synthetic-scene generator.
"""

from .baselines import cva, image_diff, ts_cva, embedding_distance_map
from .embedding import (EmbeddingMap, GridMask, distance, mask_mean_embedding,
                        project_mask, read_cache, reference_embed, write_cache)
from .errors import (AnomalyCDError, CacheError, ConfigError, SceneError,
                     TilingError)
from .metrics import (Confusion, EvalReport, EventScore, aggregate, confusion,
                      evaluate_event, format_report, scores)
from .pipeline import DetectionResult, RunConfig, detect
from .scene import (TileSpec, TimeSeriesScene, extract_tile, load_scene,
                    plan_tiles, save_scene, stitch)
from .segment import InstanceMaskSet, InstanceRecord, masks_at_pixel, segment
from .stage1 import (CandidateInstance, ChangeDensityMap, change_score,
                     direction_density, fuse_binarize, quantile_threshold,
                     select_candidates)
from .stage2 import (AnomalyScoreRecord, anomaly_score, binarize_anomalies,
                     score_candidates)
from .sweeps import ablate_timesteps, evaluate_scenes, sweep
from .synth import SynthConfig, SynthTruth, generate, generate_directory

__version__ = "0.1.0"
