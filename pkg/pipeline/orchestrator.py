"""
Pipeline Orchestrator
Runs every stage from scene loading to saved instances, with stage timing
"""

import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

from classify.aggregation import classify_proposals
from classify.label_maps import build_label_maps, save_label_maps
from fusion.proposals import RGBDProposals, fuse_proposals, generate_rgbd_masks, save_candidate_history
from geometry.projection import compute_visibility
from scene_io.extract_scene import load_scene
from scene_io.load import save_labeled_instances, write_json
from scene_io.types import LabeledInstance, Scene, SuperpointPartition
from superpoints.segmentation import compute_superpoints
from utils.config import PipelineConfig
from utils.errors import BoxFusionError, StageError
from utils.timing import TimingReport

logger = logging.getLogger(__name__)

DEFAULT_PATHS = {
    'instances': 'instances.jsonl',
    'candidates_dump': 'candidates.jsonl',
    'label_maps_dump': 'label_maps/',
}


class StageStatus(Enum):
    """Lifecycle of one pipeline stage"""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    SKIPPED = "skipped"
    FAILED = "failed"


@dataclass
class SceneResult:
    """Everything one pass over a scene produced, before anything is written"""
    instances: List[LabeledInstance]
    partition: SuperpointPartition
    label_maps: Dict[int, object] = field(default_factory=dict)
    rgbd: Optional[RGBDProposals] = None
    statuses: Dict[str, StageStatus] = field(default_factory=dict)


@contextmanager
def _stage(timing: TimingReport, name: str, statuses: Dict[str, StageStatus]):
    """Time a stage, track its status and attach the stage name to module errors."""
    statuses[name] = StageStatus.RUNNING
    with timing.stage(name) as record:
        try:
            yield record
        except StageError:
            statuses[name] = StageStatus.FAILED
            raise
        except BoxFusionError as e:
            statuses[name] = StageStatus.FAILED
            logger.error(f"Stage '{name}' failed: {e}")
            raise StageError(name, e) from e
    if statuses[name] is StageStatus.RUNNING:
        statuses[name] = StageStatus.COMPLETED


def resolve_output_path(out, scene_dir, paths: Optional[Mapping[str, str]] = None) -> Path:
    """`--out` is either a .jsonl file or a directory receiving instances.jsonl."""
    paths = {**DEFAULT_PATHS, **(paths or {})}
    if out is None:
        return Path(scene_dir) / "predictions" / paths['instances']
    out = Path(out)
    if out.suffix == '.jsonl':
        return out
    return out / paths['instances']


def process_scene(scene: Scene, config: PipelineConfig, pool: Optional[Executor] = None,
                  timing: Optional[TimingReport] = None, progress: bool = False) -> SceneResult:
    """
    Run superpoints through classification on an in-memory scene.

    Nothing is written to disk; the result carries what the save stage needs.

    Args:
        scene (Scene): Loaded scene (detections clipped and grouped by frame)
        config (PipelineConfig): Thresholds and strides
        pool (Executor, optional): Worker pool shared by parallel stages
        timing (TimingReport, optional): Receives one entry per stage
        progress (bool): Show progress bars

    Returns:
        SceneResult: Labeled instances and intermediate artifacts
    """
    timing = timing or TimingReport()
    statuses: Dict[str, StageStatus] = {}

    # =====================================================================
    # PHASE 1: SUPERPOINTS
    # =====================================================================
    with _stage(timing, 'superpoints', statuses) as record:
        if scene.partition is not None:
            partition = scene.partition
            record.counts['cached'] = 1
        else:
            partition = compute_superpoints(scene.cloud, config.granularity, config.knn,
                                            config.min_segment_size, workers=config.resolved_thread_count())
            record.counts['cached'] = 0
        record.counts['superpoints'] = partition.segment_count

    # =====================================================================
    # PHASE 2: PROJECTION AND VISIBILITY
    # =====================================================================
    with _stage(timing, 'visibility', statuses) as record:
        proj, vis = compute_visibility(scene.cloud, scene.frames, config.tau_depth, pool)
        record.counts['frames'] = len(scene.frames)
        record.counts['visible_observations'] = int(vis.visible.sum())

    # =====================================================================
    # PHASE 3: LABEL MAPS
    # =====================================================================
    with _stage(timing, 'label_maps', statuses) as record:
        label_maps = build_label_maps(scene.detections, scene.frames, pool)
        record.counts['label_maps'] = len(label_maps)

    # =====================================================================
    # PHASE 4: RGBD-BASED MASKS
    # =====================================================================
    rgbd = None
    with _stage(timing, 'rgbd_masks', statuses) as record:
        if config.rgbd_proposals:
            rgbd = generate_rgbd_masks(scene, partition, config, pool, progress=progress)
            record.counts.update(rgbd.counts())
        else:
            logger.info("RGBD-based proposals disabled; using point-based masks only")
            statuses['rgbd_masks'] = StageStatus.SKIPPED
            record.counts['rgbd_masks'] = 0

    # =====================================================================
    # PHASE 5: FUSION
    # =====================================================================
    with _stage(timing, 'fusion', statuses) as record:
        proposals = fuse_proposals(scene.point_masks, rgbd.masks if rgbd else [])
        record.counts['point_masks'] = len(scene.point_masks)
        record.counts['proposals'] = len(proposals)

    # =====================================================================
    # PHASE 6: CLASSIFICATION
    # =====================================================================
    with _stage(timing, 'classification', statuses) as record:
        frame_maps = [label_maps[fid] for fid in scene.frames.frame_ids]
        instances, _ = classify_proposals(proposals, proj, vis, frame_maps, config.top_k, pool)
        record.counts['instances'] = len(instances)

    return SceneResult(instances=instances, partition=partition, label_maps=label_maps,
                       rgbd=rgbd, statuses=statuses)


def run_pipeline(scene_dir, config: PipelineConfig, out=None, timing_path=None,
                 paths: Optional[Mapping[str, str]] = None, superpoints_path=None,
                 progress: bool = False) -> Tuple[List[LabeledInstance], TimingReport]:
    """
    Load a scene directory, run every stage and save the labeled instances.

    Outputs (instances, optional dumps, optional timing report) are written
    only after every stage succeeded, each through an atomic rename.

    Args:
        scene_dir (Path): Scene directory in the scene_io layout
        config (PipelineConfig): Validated configuration
        out (Path, optional): Output directory or .jsonl file
        timing_path (Path, optional): Where to write the timing report JSON
        paths (dict, optional): File names from the `paths` section of config.yaml
        superpoints_path (Path, optional): Superpoint cache to use instead of computing
        progress (bool): Show progress bars

    Returns:
        tuple: (instances, TimingReport)
    """
    config.validate()
    paths = {**DEFAULT_PATHS, **(paths or {})}
    threads = config.resolved_thread_count()
    timing = TimingReport()
    statuses: Dict[str, StageStatus] = {}
    logger.info(f"Starting pipeline on {scene_dir} with {threads} worker(s)")

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        with _stage(timing, 'load', statuses) as record:
            scene = load_scene(scene_dir, config, paths, superpoints_path=superpoints_path, max_workers=threads)
            record.counts['points'] = scene.cloud.point_count
            record.counts['frames'] = len(scene.frames)
            record.counts['boxes'] = scene.box_count
            record.counts['point_masks'] = len(scene.point_masks)

        result = process_scene(scene, config, pool, timing, progress)
        statuses.update(result.statuses)

        # =================================================================
        # PHASE 7: SAVE
        # =================================================================
        out_path = resolve_output_path(out, scene_dir, paths)
        with _stage(timing, 'save', statuses) as record:
            vocabulary_size = len(scene.vocabulary) if scene.vocabulary else None
            save_labeled_instances(result.instances, out_path, vocabulary_size)
            if config.dump_candidates and result.rgbd is not None:
                save_candidate_history(result.rgbd.candidates, out_path.parent / paths['candidates_dump'])
            if config.dump_label_maps:
                save_label_maps(result.label_maps, out_path.parent / paths['label_maps_dump'])
            record.counts['instances'] = len(result.instances)
    finally:
        if pool is not None:
            pool.shutdown(wait=True)

    total = timing.finish()
    if timing_path is not None:
        write_json(timing.to_dict(), timing_path)
    logger.info(f"Pipeline completed in {total:.2f} seconds: {len(result.instances)} instances")
    logger.debug("Stage status: " + ", ".join(f"{k}={v.value}" for k, v in statuses.items()))
    return result.instances, timing
