"""
Stage Timing
Per-stage wall time and item counts for a pipeline run
"""

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, List

import pandas as pd

logger = logging.getLogger(__name__)


@dataclass
class StageTiming:
    """Wall time and counts recorded for one stage"""
    name: str
    seconds: float = 0.0
    counts: Dict[str, int] = field(default_factory=dict)


class TimingReport:
    """
    Collects stage timings in execution order.

    Stage names and counts are deterministic for fixed inputs; only the
    seconds vary between runs.
    """

    def __init__(self):
        self.stages: List[StageTiming] = []
        self._start = time.perf_counter()
        self.total_seconds = 0.0

    @contextmanager
    def stage(self, name: str):
        """Time a block; yields the StageTiming so the block can add counts."""
        record = StageTiming(name=name)
        self.stages.append(record)
        started = time.perf_counter()
        logger.info(f"Stage '{name}' started")
        try:
            yield record
        finally:
            record.seconds = time.perf_counter() - started
            counts = ", ".join(f"{k}={v}" for k, v in record.counts.items())
            logger.info(f"Stage '{name}' finished in {record.seconds:.3f}s {counts}".rstrip())

    def finish(self) -> float:
        self.total_seconds = time.perf_counter() - self._start
        return self.total_seconds

    @property
    def accounted_seconds(self) -> float:
        return sum(s.seconds for s in self.stages)

    def to_dict(self) -> Dict:
        return {
            'total_seconds': self.total_seconds,
            'stages': [
                {'name': s.name, 'seconds': s.seconds, 'counts': dict(s.counts)}
                for s in self.stages
            ],
        }

    def structure(self) -> Dict:
        """The run-independent part of the report (no wall times)."""
        return {'stages': [{'name': s.name, 'counts': dict(s.counts)} for s in self.stages]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_frame(self) -> pd.DataFrame:
        """Tabular view for log summaries."""
        rows = []
        for s in self.stages:
            row = {'stage': s.name, 'seconds': round(s.seconds, 4)}
            row.update(s.counts)
            rows.append(row)
        return pd.DataFrame(rows)
