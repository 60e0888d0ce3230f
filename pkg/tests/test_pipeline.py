"""
End-to-end pipeline and command-line tests
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest

from evaluation.metrics import compute_map_suite, mask_iou
from evaluation.synthetic import SyntheticConfig, generate_synthetic_scene
from pipeline.cli import main, parse_range, parse_size
from pipeline.orchestrator import StageStatus, process_scene, resolve_output_path, run_pipeline
from scene_io.extract_scene import load_labeled_instances, load_scene
from scene_io.load import save_labeled_instances
from scene_io.types import LabeledInstance, MaskSource, Scene
from utils.config import PipelineConfig
from utils.errors import StageError, UsageError

STAGES = ['load', 'superpoints', 'visibility', 'label_maps', 'rgbd_masks', 'fusion', 'classification', 'save']


def run_config(**values):
    return PipelineConfig().with_values({'frame_stride': 1, 'pixel_stride': 2, 'thread_count': 1, **values})


# ============================================================================
# IN-MEMORY PIPELINE
# ============================================================================

def test_process_scene_recovers_both_objects(separated_scene):
    result = process_scene(separated_scene.to_scene(), run_config())
    assert all(status is StageStatus.COMPLETED for status in result.statuses.values())

    cuboid, ellipsoid = separated_scene.gt
    point_based = [i for i in result.instances if i.source is MaskSource.POINT_BASED]
    assert len(point_based) == 1
    assert point_based[0].mask == cuboid.mask
    assert point_based[0].class_id == cuboid.class_id

    rgbd = [i for i in result.instances if i.source is MaskSource.RGBD_BASED and i.class_id == ellipsoid.class_id]
    assert rgbd
    assert max(mask_iou(i.mask, ellipsoid.mask) for i in rgbd) >= 0.25

    report = compute_map_suite(result.instances, separated_scene.gt)
    assert report.map_25 >= 0.5


def test_point_masks_only(separated_scene):
    result = process_scene(separated_scene.to_scene(), run_config(rgbd_proposals=False))
    assert result.statuses['rgbd_masks'] is StageStatus.SKIPPED
    assert result.rgbd is None
    assert [i.source for i in result.instances] == [MaskSource.POINT_BASED]


def test_scene_without_detections_yields_nothing(separated_scene):
    base = separated_scene.to_scene()
    scene = Scene(cloud=base.cloud, frames=base.frames, detections={fid: [] for fid in base.frames.frame_ids},
                  point_masks=base.point_masks)
    result = process_scene(scene, run_config())
    assert result.instances == []


def test_process_scene_is_independent_of_worker_count(separated_scene):
    scene = separated_scene.to_scene()
    serial = process_scene(scene, run_config())
    with ThreadPoolExecutor(max_workers=4) as pool:
        pooled = process_scene(scene, run_config(thread_count=4), pool=pool)
    assert serial.instances == pooled.instances


# ============================================================================
# SCENE DIRECTORIES
# ============================================================================

def test_resolve_output_path(tmp_path):
    assert resolve_output_path(None, tmp_path) == tmp_path / "predictions" / "instances.jsonl"
    assert resolve_output_path(tmp_path / "x.jsonl", tmp_path) == tmp_path / "x.jsonl"
    assert resolve_output_path(tmp_path / "out", tmp_path) == tmp_path / "out" / "instances.jsonl"


def test_run_pipeline_writes_outputs(scene_dir, tmp_path):
    config = run_config(dump_candidates=True, dump_label_maps=True)
    instances, timing = run_pipeline(scene_dir, config, out=tmp_path / "out", timing_path=tmp_path / "timing.json")

    saved = load_labeled_instances(tmp_path / "out" / "instances.jsonl")
    assert sorted(saved, key=LabeledInstance.sort_key) == sorted(instances, key=LabeledInstance.sort_key)
    assert (tmp_path / "out" / "candidates.jsonl").exists()
    assert (tmp_path / "out" / "label_maps" / "0.labels.png").exists()

    document = json.loads((tmp_path / "timing.json").read_text())
    assert [s['name'] for s in document['stages']] == STAGES
    assert timing.accounted_seconds <= timing.total_seconds

    in_memory = process_scene(load_scene(scene_dir, config), config)
    assert in_memory.instances == instances


def test_run_pipeline_output_is_reproducible_across_threads(scene_dir, tmp_path):
    _, serial_timing = run_pipeline(scene_dir, run_config(), out=tmp_path / "one.jsonl")
    _, pooled_timing = run_pipeline(scene_dir, run_config(thread_count=4), out=tmp_path / "four.jsonl")
    assert (tmp_path / "one.jsonl").read_bytes() == (tmp_path / "four.jsonl").read_bytes()
    assert serial_timing.structure() == pooled_timing.structure()


def test_failed_stage_writes_nothing(scene_dir, tmp_path):
    (scene_dir / "masks.txt").write_text("1 3\n0 1 2\n")
    with pytest.raises(StageError) as error:
        run_pipeline(scene_dir, run_config(), out=tmp_path / "out")
    assert error.value.stage == 'load'
    assert not (tmp_path / "out").exists()


def test_superpoint_cache_is_used(scene_dir, tmp_path):
    assert main(["superpoints", str(scene_dir), "--out", str(tmp_path / "sp.txt"), "--validate"]) == 0
    _, timing = run_pipeline(scene_dir, run_config(), out=tmp_path / "out", superpoints_path=tmp_path / "sp.txt")
    superpoints = next(s for s in timing.stages if s.name == 'superpoints')
    assert superpoints.counts['cached'] == 1


# ============================================================================
# COMMAND LINE
# ============================================================================

def test_argument_helpers():
    assert parse_range("2..5") == (2, 5)
    assert parse_range("3") == (3, 3)
    assert parse_size("320x240") == (320, 240)
    with pytest.raises(UsageError):
        parse_range("5..2")
    with pytest.raises(UsageError):
        parse_size("320")


def test_cli_synth_run_eval(tmp_path):
    scene = tmp_path / "scene"
    assert main(["synth", "--objects", "2..2", "--frames", "4", "--size", "128x96",
                 "--seed", "5", "--out", str(scene)]) == 0
    for name in ("cloud.ply", "detections.jsonl", "masks.txt", "gt.txt", "classes.txt", "frames"):
        assert (scene / name).exists()

    out = tmp_path / "pred"
    timing = tmp_path / "timing.json"
    assert main(["run", str(scene), "--out", str(out), "--set", "frame_stride=1", "--threads", "1",
                 "--timing", str(timing)]) == 0
    assert (out / "instances.jsonl").exists()
    assert [s['name'] for s in json.loads(timing.read_text())['stages']] == STAGES

    report = tmp_path / "report.json"
    assert main(["eval", "--pred", str(out), "--gt", str(scene / "gt.txt"), "--out", str(report)]) == 0
    document = json.loads(report.read_text())
    assert 0.0 <= document['map_50_95'] <= 1.0
    assert set(document) >= {'map_50_95', 'map_50', 'map_25', 'per_class_ap'}


def test_cli_eval_of_ground_truth_is_perfect(tmp_path, separated_scene):
    scene = tmp_path / "scene"
    from evaluation.synthetic import write_synthetic_scene
    write_synthetic_scene(separated_scene, scene)
    perfect = [LabeledInstance(mask=g.mask, class_id=g.class_id, confidence=1.0, source=MaskSource.POINT_BASED)
               for g in separated_scene.gt]
    save_labeled_instances(perfect, tmp_path / "perfect.jsonl")

    report = tmp_path / "report.json"
    assert main(["eval", "--pred", str(tmp_path / "perfect.jsonl"), "--gt", str(scene / "gt.txt"),
                 "--out", str(report)]) == 0
    document = json.loads(report.read_text())
    assert document['map_50_95'] == 1.0
    assert document['class_names'] == {'1': 'medium cuboid', '4': 'medium ellipsoid'}


def test_cli_print_config(scene_dir, capsys):
    assert main(["run", str(scene_dir), "--set", "top_k=3", "--no-rgbd", "--print-config"]) == 0
    text = capsys.readouterr().out
    assert "top_k=3\n" in text
    assert "rgbd_proposals=false\n" in text


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["run"],
    ["run", "somewhere", "--no-such-flag"],
    ["synth", "--objects", "x", "--out", "unused"],
    ["synth", "--frames", "0", "--out", "unused"],
    ["eval", "--pred", "p.jsonl", "--gt", "gt.txt"],
])
def test_cli_usage_errors(argv):
    assert main(argv) == 1


def test_cli_invalid_set_value(scene_dir):
    assert main(["run", str(scene_dir), "--set", "tau_box=2"]) == 1


def test_cli_missing_camera_file(scene_dir, tmp_path):
    (scene_dir / "frames" / "0.extrinsic.txt").unlink()
    assert main(["run", str(scene_dir), "--out", str(tmp_path / "out")]) == 2
    assert not (tmp_path / "out").exists()


# ============================================================================
# DEFAULT SYNTHETIC SCENES
# ============================================================================

SEEDS = range(20)


@lru_cache(maxsize=None)
def default_run(seed, withhold_fraction):
    """Default generator and pipeline settings, frames strided as load_scene strides them."""
    config = PipelineConfig()
    if withhold_fraction == 0.0:
        # the layout does not depend on the withheld share
        scene = default_run(seed, 0.5)[0]
        scene = replace(scene, partial_point_masks=[g.mask for g in scene.gt], withheld=())
    else:
        scene = generate_synthetic_scene(replace(SyntheticConfig(), seed=seed, withhold_fraction=withhold_fraction))
    return scene, process_scene(scene.to_scene(frame_stride=config.frame_stride), config)


def withheld_objects_recovered(scene, instances):
    rgbd = [i for i in instances if i.source is MaskSource.RGBD_BASED]
    return all(
        any(i.class_id == scene.gt[index].class_id and mask_iou(i.mask, scene.gt[index].mask) >= 0.25 for i in rgbd)
        for index in scene.withheld
    )


@pytest.mark.parametrize("seed", SEEDS)
def test_complete_point_masks_score_perfectly(seed):
    scene, result = default_run(seed, 0.0)
    assert len(scene.frames) == 30
    assert compute_map_suite(result.instances, scene.gt).map_25 == 1.0


def test_withheld_objects_are_recovered_on_default_scenes():
    recovered = 0
    map_25 = []
    for seed in SEEDS:
        scene, result = default_run(seed, 0.5)
        assert len(scene.withheld) >= 2
        recovered += withheld_objects_recovered(scene, result.instances)
        map_25.append(compute_map_suite(result.instances, scene.gt).map_25)
    assert recovered >= 18
    assert np.mean(map_25) >= 0.90


def test_cli_default_chain_scores_perfectly(tmp_path):
    scene = tmp_path / "scene"
    assert main(["synth", "--objects", "5..5", "--frames", "30", "--size", "320x240",
                 "--seed", "7", "--out", str(scene)]) == 0
    assert len(list((scene / "frames").glob("*.depth.png"))) == 30

    out = tmp_path / "pred"
    assert main(["run", str(scene), "--out", str(out)]) == 0
    report = tmp_path / "report.json"
    assert main(["eval", "--pred", str(out), "--gt", str(scene / "gt.txt"), "--out", str(report)]) == 0
    assert json.loads(report.read_text())['map_25'] == 1.0
