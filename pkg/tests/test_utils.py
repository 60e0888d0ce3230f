"""
Configuration, errors, timing and logging tests
"""

import json
import logging

import pytest

from utils.config import PipelineConfig, load_app_config, parse_assignments
from utils.errors import DataError, InvalidConfig, StageError, UsageError, MalformedLine
from utils.logging_setup import configure_logging
from utils.timing import TimingReport


# ============================================================================
# CONFIGURATION
# ============================================================================

def test_repository_config_matches_defaults():
    assert PipelineConfig.from_app_config(load_app_config()) == PipelineConfig()


def test_config_text_round_trip():
    config = PipelineConfig(tau_merge=0.3, top_k=7, granularity=0.125, invert_extrinsics=True, seed=4)
    assert PipelineConfig.from_text(config.to_text()) == config


def test_config_file_keeps_base_values():
    base = PipelineConfig(top_k=9)
    config = PipelineConfig.from_text("# comment\n\ntau_box = 0.5\n", base=base)
    assert config.tau_box == 0.5
    assert config.top_k == 9


def test_overrides_are_typed():
    config = PipelineConfig().with_overrides({'frame_stride': '1', 'tau_depth': '0.2', 'rgbd_proposals': 'false'})
    assert config.frame_stride == 1 and isinstance(config.frame_stride, int)
    assert config.tau_depth == 0.2
    assert config.rgbd_proposals is False


@pytest.mark.parametrize("key, value", [
    ('tau_box', '1.5'),
    ('tau_filter', '-0.1'),
    ('top_k', '0'),
    ('knn', '2.5'),
    ('granularity', '0'),
    ('no_such_key', '1'),
    ('rgbd_proposals', 'maybe'),
])
def test_invalid_config_values(key, value):
    with pytest.raises(InvalidConfig):
        PipelineConfig().with_overrides({key: value})


def test_parse_assignments():
    assert parse_assignments(["a=1", "  # skipped", "b = x=y"]) == {'a': '1', 'b': 'x=y'}
    with pytest.raises(UsageError):
        parse_assignments(["novalue"])


def test_resolved_thread_count(monkeypatch):
    assert PipelineConfig(thread_count=3).resolved_thread_count() == 3
    monkeypatch.setenv("BOXFUSION_THREADS", "2")
    assert PipelineConfig().resolved_thread_count() == 2
    monkeypatch.setenv("BOXFUSION_THREADS", "lots")
    assert PipelineConfig().resolved_thread_count() >= 1


def test_missing_app_config(tmp_path):
    with pytest.raises(DataError):
        load_app_config(tmp_path / "absent.yaml")


# ============================================================================
# ERRORS
# ============================================================================

def test_stage_error_names_the_stage():
    cause = MalformedLine("detections.jsonl", 4, "invalid JSON")
    error = StageError('load', cause)
    assert isinstance(error, DataError)
    assert error.stage == 'load'
    assert str(error) == "stage 'load' failed: detections.jsonl:4: invalid JSON"


# ============================================================================
# TIMING
# ============================================================================

def test_timing_report_records_stages():
    timing = TimingReport()
    with timing.stage('load') as record:
        record.counts['points'] = 10
    with pytest.raises(ValueError):
        with timing.stage('broken'):
            raise ValueError("x")
    total = timing.finish()

    assert [s.name for s in timing.stages] == ['load', 'broken']
    assert timing.accounted_seconds <= total
    assert timing.structure() == {'stages': [{'name': 'load', 'counts': {'points': 10}},
                                             {'name': 'broken', 'counts': {}}]}
    assert json.loads(timing.to_json())['stages'][0]['counts'] == {'points': 10}
    frame = timing.to_frame()
    assert frame['stage'].tolist() == ['load', 'broken']
    assert 'points' in frame.columns


# ============================================================================
# LOGGING
# ============================================================================

def test_configure_logging_writes_file(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    root = configure_logging(level="DEBUG", log_file=str(log_file), color=False)
    try:
        logging.getLogger("boxfusion.test").info("hello from the test")
        for handler in root.handlers:
            handler.flush()
        assert "hello from the test" in log_file.read_text()
        assert len(root.handlers) == 2
    finally:
        for handler in list(root.handlers):
            handler.close()
            root.removeHandler(handler)
