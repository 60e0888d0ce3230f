"""
Configuration
Application config (config.yaml) and the typed pipeline configuration
"""

import logging
import os
from dataclasses import dataclass, fields, replace, asdict
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from utils.errors import InvalidConfig, UsageError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config.yaml"


def load_app_config(path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load the application configuration file.

    Args:
        path (Path, optional): Alternate config.yaml; defaults to the repository copy

    Returns:
        dict: Parsed YAML document
    """
    config_path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not config_path.exists():
        raise InvalidConfig(f"Config file not found: {config_path}")
    with open(config_path, 'r') as f:
        return yaml.safe_load(f) or {}


def _coerce(name: str, value: Any, target: type) -> Any:
    """Coerce a YAML-typed scalar to the declared field type."""
    try:
        if target is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ('true', 'yes', 'on', '1'):
                return True
            if isinstance(value, str) and value.lower() in ('false', 'no', 'off', '0'):
                return False
            if isinstance(value, int):
                return bool(value)
            raise ValueError(f"not a boolean: {value!r}")
        if target is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(f"not an integer: {value!r}")
            return int(value)
        if target is float:
            if isinstance(value, bool):
                raise ValueError(f"not a number: {value!r}")
            return float(value)
    except (TypeError, ValueError) as e:
        raise InvalidConfig(f"{name}: {e}") from e
    return value


def _parse_scalar(text: str) -> Any:
    """Type a config scalar the way YAML would."""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def _format_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class PipelineConfig:
    """All thresholds and knobs of one pipeline run."""
    tau_box: float = 0.75
    tau_spp: float = 0.5
    tau_merge: float = 0.25
    tau_filter: float = 0.75
    tau_depth: float = 0.10
    top_k: int = 5
    frame_stride: int = 10
    pixel_stride: int = 5
    granularity: float = 0.05
    knn: int = 10
    min_segment_size: int = 20
    depth_scale: float = 1000.0
    invert_extrinsics: bool = False
    min_lift_points: int = 10
    rgbd_proposals: bool = True
    dump_candidates: bool = False
    dump_label_maps: bool = False
    thread_count: int = 0
    seed: int = 0

    @classmethod
    def field_types(cls) -> Dict[str, type]:
        return {f.name: f.type for f in fields(cls)}

    @classmethod
    def from_app_config(cls, app_config: Mapping[str, Any]) -> "PipelineConfig":
        """
        Build defaults from the `pipeline` and `superpoints` sections of config.yaml.

        Args:
            app_config (dict): Output of load_app_config()

        Returns:
            PipelineConfig: Validated configuration
        """
        values: Dict[str, Any] = dict(app_config.get('pipeline', {}) or {})
        sp = app_config.get('superpoints', {}) or {}
        if 'granularity' in sp:
            values['granularity'] = sp['granularity']
        if 'knn' in sp:
            values['knn'] = sp['knn']
        if 'min_segment_size' in sp:
            values['min_segment_size'] = sp['min_segment_size']
        return cls().with_values(values)

    def with_values(self, values: Mapping[str, Any]) -> "PipelineConfig":
        """Return a copy with already-typed values applied and validated."""
        types = self.field_types()
        updates = {}
        for key, value in values.items():
            if key not in types:
                raise InvalidConfig(f"Unknown config key: {key}")
            updates[key] = _coerce(key, value, types[key])
        config = replace(self, **updates)
        config.validate()
        return config

    def with_overrides(self, overrides: Mapping[str, str]) -> "PipelineConfig":
        """
        Apply `key=value` string overrides (from --set or a config file).

        Args:
            overrides (dict): {key: raw string value}

        Returns:
            PipelineConfig: New validated configuration
        """
        return self.with_values({k: _parse_scalar(v) for k, v in overrides.items()})

    def validate(self):
        """Raise InvalidConfig if any value is out of range."""
        for name in ('tau_box', 'tau_spp', 'tau_merge', 'tau_filter'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfig(f"{name} must be within [0, 1], got {value}")
        if not self.tau_depth > 0:
            raise InvalidConfig(f"tau_depth must be positive, got {self.tau_depth}")
        if not self.granularity > 0:
            raise InvalidConfig(f"granularity must be positive, got {self.granularity}")
        if not self.depth_scale > 0:
            raise InvalidConfig(f"depth_scale must be positive, got {self.depth_scale}")
        for name in ('top_k', 'frame_stride', 'pixel_stride', 'knn', 'min_segment_size'):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ('min_lift_points', 'thread_count', 'seed'):
            if getattr(self, name) < 0:
                raise InvalidConfig(f"{name} must be >= 0, got {getattr(self, name)}")

    def to_text(self) -> str:
        """Serialize as flat key=value lines in field order."""
        return "".join(f"{k}={_format_scalar(v)}\n" for k, v in asdict(self).items())

    @classmethod
    def from_text(cls, text: str, base: Optional["PipelineConfig"] = None) -> "PipelineConfig":
        """
        Parse a flat key=value config file.

        Blank lines and lines starting with '#' are ignored. Keys absent from
        the text keep the values of `base` (or the dataclass defaults).
        """
        overrides = parse_assignments(text.splitlines(), source="config")
        return (base or cls()).with_overrides(overrides)

    def resolved_thread_count(self, env_var: str = "BOXFUSION_THREADS") -> int:
        """Worker count: explicit value, else the environment, else CPU count."""
        if self.thread_count > 0:
            return self.thread_count
        env_value = os.environ.get(env_var)
        if env_value:
            try:
                count = int(env_value)
                if count > 0:
                    return count
            except ValueError:
                logger.warning(f"Ignoring non-integer {env_var}={env_value!r}")
        return os.cpu_count() or 1


def parse_assignments(lines, source: str = "--set") -> Dict[str, str]:
    """
    Split `key=value` strings into a dict of raw string values.

    Args:
        lines (iterable): Assignment strings
        source (str): Name used in error messages

    Returns:
        dict: {key: raw value}
    """
    result: Dict[str, str] = {}
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        if '=' not in stripped:
            raise UsageError(f"{source} line {number}: expected key=value, got {stripped!r}")
        key, value = stripped.split('=', 1)
        key = key.strip()
        if not key:
            raise UsageError(f"{source} line {number}: empty key")
        result[key] = value.strip()
    return result
