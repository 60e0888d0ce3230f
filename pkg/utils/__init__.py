"""
Utilities Package
Configuration, errors, logging and stage timing shared by every stage
"""

from .config import PipelineConfig, load_app_config, parse_assignments
from .timing import TimingReport

__all__ = ['PipelineConfig', 'load_app_config', 'parse_assignments', 'TimingReport']
