"""
Instance Metrics
Point-set IoU, average precision and the mAP suite with class splits
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set

import numpy as np
import pandas as pd

from scene_io.types import BinaryMask3D, GroundTruthInstance, LabeledInstance

logger = logging.getLogger(__name__)

IOU_THRESHOLDS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
IOU_25 = 0.25


def mask_iou(a: BinaryMask3D, b: BinaryMask3D) -> float:
    """|a & b| / |a | b|; 0.0 when both masks are empty."""
    intersection = a.intersection_size(b)
    union = len(a) + len(b) - intersection
    return intersection / union if union else 0.0


def _average_precision(recall: np.ndarray, precision: np.ndarray) -> float:
    """Area under the PR curve after making precision non-increasing from the right."""
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(mpre.size - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])
    changes = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[changes + 1] - mrec[changes]) * mpre[changes + 1]))


def _ordered_predictions(predictions: Iterable[LabeledInstance], class_id: int) -> List[LabeledInstance]:
    return sorted((p for p in predictions if p.class_id == class_id), key=LabeledInstance.sort_key)


def _iou_matrix(predictions: Sequence[LabeledInstance], gt: Sequence[GroundTruthInstance]) -> np.ndarray:
    matrix = np.zeros((len(predictions), len(gt)))
    for i, prediction in enumerate(predictions):
        for j, target in enumerate(gt):
            matrix[i, j] = mask_iou(prediction.mask, target.mask)
    return matrix


def _ap_from_matrix(ious: np.ndarray, n_gt: int, threshold: float) -> float:
    """Greedy matching in prediction order: best unmatched GT with IoU >= threshold."""
    matched = np.zeros(n_gt, dtype=bool)
    true_positive = np.zeros(ious.shape[0])
    for i in range(ious.shape[0]):
        row = np.where(matched | (ious[i] < threshold), -1.0, ious[i])
        if row.size and row.max() >= 0:
            j = int(np.argmax(row))
            matched[j] = True
            true_positive[i] = 1.0
    if ious.shape[0] == 0:
        return 0.0
    cumulative_tp = np.cumsum(true_positive)
    recall = cumulative_tp / n_gt
    precision = cumulative_tp / np.arange(1, ious.shape[0] + 1)
    return _average_precision(recall, precision)


def compute_ap(predictions: Sequence[LabeledInstance], gt: Sequence[GroundTruthInstance],
               class_id: int, iou_threshold: float) -> Optional[float]:
    """
    Average precision of one class at one IoU threshold.

    Args:
        predictions (list): All predicted instances
        gt (list): All ground-truth instances
        class_id (int): Class to evaluate
        iou_threshold (float): Minimum IoU for a match

    Returns:
        float or None: AP in [0, 1]; None when the class has no ground truth
    """
    targets = [g for g in gt if g.class_id == class_id]
    if not targets:
        return None
    ordered = _ordered_predictions(predictions, class_id)
    return _ap_from_matrix(_iou_matrix(ordered, targets), len(targets), iou_threshold)


def _threshold_key(threshold: float) -> str:
    return f"{threshold:.2f}"


@dataclass
class APReport:
    """mAP summary of one evaluation"""
    map_50_95: float
    map_50: float
    map_25: float
    per_class_ap: Dict[int, Dict[str, float]] = field(default_factory=dict)
    split_map: Dict[str, float] = field(default_factory=dict)
    class_names: Dict[int, str] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            'map_50_95': self.map_50_95,
            'map_50': self.map_50,
            'map_25': self.map_25,
            'per_class_ap': {str(c): dict(v) for c, v in sorted(self.per_class_ap.items())},
            'split_map': dict(sorted(self.split_map.items())),
            'class_names': {str(c): n for c, n in sorted(self.class_names.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, document: Mapping) -> "APReport":
        return cls(
            map_50_95=float(document['map_50_95']),
            map_50=float(document['map_50']),
            map_25=float(document['map_25']),
            per_class_ap={int(c): {k: float(v) for k, v in aps.items()}
                          for c, aps in document.get('per_class_ap', {}).items()},
            split_map={k: float(v) for k, v in document.get('split_map', {}).items()},
            class_names={int(c): n for c, n in document.get('class_names', {}).items()},
        )

    def per_class_table(self) -> pd.DataFrame:
        """One row per class: AP at every threshold and the 50:95 mean."""
        rows = []
        for class_id, aps in sorted(self.per_class_ap.items()):
            row = {'class_id': class_id, 'class_name': self.class_names.get(class_id, str(class_id))}
            row.update({f"AP{k}": v for k, v in aps.items()})
            row['AP50:95'] = float(np.mean([aps[_threshold_key(t)] for t in IOU_THRESHOLDS]))
            rows.append(row)
        return pd.DataFrame(rows)


def _mean(values: List[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def compute_map_suite(predictions: Sequence[LabeledInstance], gt: Sequence[GroundTruthInstance],
                      class_subset: Optional[Set[int]] = None,
                      splits: Optional[Mapping[str, Iterable[int]]] = None,
                      class_names: Optional[Sequence[str]] = None) -> APReport:
    """
    Evaluate predictions at every IoU threshold.

    Only classes with ground truth are averaged; class_subset narrows them
    further. Each named split reports its own mAP(50:95).

    Args:
        predictions (list): Predicted instances
        gt (list): Ground-truth instances
        class_subset (set, optional): Classes to include in the means
        splits (dict, optional): split name -> class ids
        class_names (list, optional): Vocabulary for report labels

    Returns:
        APReport: Aggregated metrics
    """
    thresholds = sorted(set(IOU_THRESHOLDS) | {IOU_25})
    per_class: Dict[int, Dict[str, float]] = {}
    for class_id in sorted({g.class_id for g in gt}):
        if class_subset is not None and class_id not in class_subset:
            continue
        targets = [g for g in gt if g.class_id == class_id]
        ordered = _ordered_predictions(predictions, class_id)
        ious = _iou_matrix(ordered, targets)
        per_class[class_id] = {_threshold_key(t): _ap_from_matrix(ious, len(targets), t) for t in thresholds}

    def _map_50_95(classes: Iterable[int]) -> float:
        return _mean([_mean([per_class[c][_threshold_key(t)] for t in IOU_THRESHOLDS]) for c in classes])

    split_map: Dict[str, float] = {}
    for name, members in (splits or {}).items():
        present = [c for c in sorted(set(members)) if c in per_class]
        if not present:
            logger.warning(f"Split '{name}' has no ground-truth classes; reporting 0.0")
        split_map[name] = _map_50_95(present)

    names = {c: class_names[c] for c in per_class if class_names and 0 <= c < len(class_names)}
    report = APReport(
        map_50_95=_map_50_95(per_class),
        map_50=_mean([aps[_threshold_key(0.50)] for aps in per_class.values()]),
        map_25=_mean([aps[_threshold_key(IOU_25)] for aps in per_class.values()]),
        per_class_ap=per_class,
        split_map=split_map,
        class_names=names,
    )
    logger.info(
        f"mAP {report.map_50_95:.4f}, mAP50 {report.map_50:.4f}, mAP25 {report.map_25:.4f} "
        f"over {len(per_class)} classes"
    )
    return report
