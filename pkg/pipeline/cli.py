"""
Command-Line Interface
Subcommands run, superpoints, synth and eval with exit codes 0 / 1 (usage) / 2 (data)
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv

from evaluation.metrics import compute_map_suite
from evaluation.synthetic import SyntheticConfig, generate_synthetic_scene, write_synthetic_scene
from pipeline.orchestrator import run_pipeline
from scene_io.extract_scene import (
    load_ground_truth, load_labeled_instances, load_point_cloud, load_vocabulary, read_ground_truth_header,
)
from scene_io.load import save_superpoints, write_json
from superpoints.graph import build_knn_graph
from superpoints.segmentation import segment_graph, validate_partition
from utils.config import PipelineConfig, load_app_config, parse_assignments
from utils.errors import DataError, InvalidConfig, UsageError
from utils.logging_setup import configure_from_app_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so usage errors map to exit 1."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boxfusion", description="Box-guided open-vocabulary 3D instance fusion")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--config-yaml", default=None, help="Alternate application config.yaml")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="Run the pipeline on a scene directory")
    run.add_argument("scene_dir")
    run.add_argument("--config", help="Flat key=value pipeline config file")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="Override one config value")
    run.add_argument("--out", help="Output directory or .jsonl file")
    run.add_argument("--timing", help="Write the stage timing report here")
    run.add_argument("--threads", type=int, help="Worker count (0 = auto)")
    run.add_argument("--superpoints", help="Superpoint cache to use")
    run.add_argument("--no-rgbd", action="store_true", help="Point-based masks only")
    run.add_argument("--dump-candidates", action="store_true")
    run.add_argument("--dump-label-maps", action="store_true")
    run.add_argument("--print-config", action="store_true", help="Print the resolved config and exit")

    sp = sub.add_parser("superpoints", help="Compute and cache superpoints of a scene")
    sp.add_argument("scene_dir")
    sp.add_argument("--out", required=True)
    sp.add_argument("--config")
    sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    sp.add_argument("--validate", action="store_true", help="Check cover and connectivity")

    synth = sub.add_parser("synth", help="Generate a synthetic scene directory")
    synth.add_argument("--objects", default=None, help="Object count range A..B")
    synth.add_argument("--frames", type=int, default=None)
    synth.add_argument("--size", default=None, help="Image size WxH")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.add_argument("--withhold-fraction", type=float, default=None)
    synth.add_argument("--jitter", type=float, default=None)

    ev = sub.add_parser("eval", help="Score predictions against ground truth")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--gt", required=True)
    ev.add_argument("--classes", help="Comma-separated class ids to average")
    ev.add_argument("--splits", help="JSON file mapping split name to class ids")
    ev.add_argument("--out", required=True, help="Report JSON path")
    return parser


# ============================================================================
# ARGUMENT HELPERS
# ============================================================================

def parse_range(text: str) -> tuple:
    """'A..B' or 'A' -> (A, B)."""
    try:
        if '..' in text:
            low, high = text.split('..', 1)
            low, high = int(low), int(high)
        else:
            low = high = int(text)
    except ValueError:
        raise UsageError(f"--objects: expected A..B, got {text!r}")
    if low < 1 or high < low:
        raise UsageError(f"--objects: invalid range {text!r}")
    return low, high


def parse_size(text: str) -> tuple:
    """'WxH' -> (W, H)."""
    try:
        width, height = (int(v) for v in text.lower().split('x'))
    except ValueError:
        raise UsageError(f"--size: expected WxH, got {text!r}")
    if width < 1 or height < 1:
        raise UsageError(f"--size: dimensions must be positive, got {text!r}")
    return width, height


def parse_classes(text: Optional[str]) -> Optional[set]:
    if not text:
        return None
    try:
        return {int(v) for v in text.split(',') if v.strip()}
    except ValueError:
        raise UsageError(f"--classes: expected comma-separated integers, got {text!r}")


def resolve_config(args, app_config: Dict) -> PipelineConfig:
    """config.yaml defaults, then --config file, then --set and flag overrides."""
    config = PipelineConfig.from_app_config(app_config)
    if getattr(args, 'config', None):
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"--config: file not found: {path}")
        config = PipelineConfig.from_text(path.read_text(encoding='utf-8'), base=config)

    flags: Dict[str, object] = {}
    if getattr(args, 'threads', None) is not None:
        flags['thread_count'] = args.threads
    if getattr(args, 'no_rgbd', False):
        flags['rgbd_proposals'] = False
    if getattr(args, 'dump_candidates', False):
        flags['dump_candidates'] = True
    if getattr(args, 'dump_label_maps', False):
        flags['dump_label_maps'] = True
    try:
        config = config.with_overrides(parse_assignments(args.set or [], source="--set"))
        config = config.with_values(flags)
    except InvalidConfig as e:
        raise UsageError(f"--set: {e}")
    return config


def _progress_enabled(app_config: Dict) -> bool:
    return bool((app_config.get('performance') or {}).get('progress_bars', True)) and sys.stderr.isatty()


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def cmd_run(args, app_config: Dict) -> int:
    config = resolve_config(args, app_config)
    if args.print_config:
        sys.stdout.write(config.to_text())
        return EXIT_OK
    paths = app_config.get('paths') or {}
    instances, timing = run_pipeline(
        args.scene_dir, config, out=args.out, timing_path=args.timing, paths=paths,
        superpoints_path=args.superpoints, progress=_progress_enabled(app_config),
    )
    logger.info("Stage summary:\n" + timing.to_frame().to_string(index=False))
    return EXIT_OK


def cmd_superpoints(args, app_config: Dict) -> int:
    config = resolve_config(args, app_config)
    paths = app_config.get('paths') or {}
    cloud = load_point_cloud(Path(args.scene_dir) / paths.get('point_cloud', 'cloud.ply'))
    graph = build_knn_graph(cloud, config.knn, workers=config.resolved_thread_count())
    partition = segment_graph(graph, config.granularity, config.min_segment_size)
    if args.validate and not validate_partition(partition, graph):
        raise DataError("Superpoint partition failed validation")
    save_superpoints(partition, args.out)
    return EXIT_OK


def cmd_synth(args, app_config: Dict) -> int:
    overrides = {'seed': args.seed, 'frames': args.frames, 'withhold_fraction': args.withhold_fraction,
                 'jitter': args.jitter}
    if args.objects:
        overrides['objects_min'], overrides['objects_max'] = parse_range(args.objects)
    if args.size:
        overrides['width'], overrides['height'] = parse_size(args.size)
    if args.frames is not None and args.frames < 1:
        raise UsageError(f"--frames must be >= 1, got {args.frames}")
    if args.withhold_fraction is not None and not 0.0 <= args.withhold_fraction <= 1.0:
        raise UsageError(f"--withhold-fraction must be within [0, 1], got {args.withhold_fraction}")

    synth_config = SyntheticConfig.from_app_config(app_config, **overrides)
    scene = generate_synthetic_scene(synth_config)
    depth_scale = PipelineConfig.from_app_config(app_config).depth_scale
    write_synthetic_scene(scene, args.out, depth_scale=depth_scale)
    return EXIT_OK


def _load_splits(args, app_config: Dict) -> Dict[str, List[int]]:
    if args.splits:
        path = Path(args.splits)
        if not path.exists():
            raise UsageError(f"--splits: file not found: {path}")
        try:
            document = json.loads(path.read_text(encoding='utf-8'))
            return {str(name): [int(c) for c in members] for name, members in document.items()}
        except (json.JSONDecodeError, AttributeError, TypeError, ValueError) as e:
            raise DataError(f"{path}: invalid split file ({e})")
    return dict((app_config.get('evaluation') or {}).get('splits') or {})


def cmd_eval(args, app_config: Dict) -> int:
    class_subset = parse_classes(args.classes)
    splits = _load_splits(args, app_config)
    gt_path = Path(args.gt)
    n_points = read_ground_truth_header(gt_path)
    gt = load_ground_truth(gt_path, n_points)
    predictions = load_labeled_instances(args.pred)
    vocab_path = gt_path.parent / (app_config.get('paths') or {}).get('vocabulary', 'classes.txt')
    class_names = load_vocabulary(vocab_path) if vocab_path.exists() else None

    report = compute_map_suite(predictions, gt, class_subset=class_subset, splits=splits, class_names=class_names)
    table = report.per_class_table()
    if not table.empty:
        logger.info("Per-class AP:\n" + table.to_string(index=False))
    write_json(report.to_dict(), args.out)
    logger.info(f"AP report written to {args.out}: mAP {report.map_50_95:.3f}, mAP_25 {report.map_25:.3f}")
    return EXIT_OK


COMMANDS = {
    'run': cmd_run,
    'superpoints': cmd_superpoints,
    'synth': cmd_synth,
    'eval': cmd_eval,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point.

    Args:
        argv (list, optional): Arguments without the program name

    Returns:
        int: 0 on success, 1 on usage error, 2 on data error
    """
    load_dotenv()
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        if not args.command:
            raise UsageError("a subcommand is required: run, superpoints, synth or eval")
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return EXIT_USAGE

    try:
        app_config = load_app_config(args.config_yaml)
    except DataError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_DATA
    configure_from_app_config(app_config, level_override=args.log_level or os.environ.get('BOXFUSION_LOG_LEVEL'))

    try:
        return COMMANDS[args.command](args, app_config)
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        sys.stderr.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except DataError as e:
        logger.error(str(e))
        return EXIT_DATA
