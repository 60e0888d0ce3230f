"""
Pipeline Package
Stage orchestration and the command-line interface
"""

from .orchestrator import StageStatus, SceneResult, process_scene, run_pipeline, resolve_output_path

__all__ = ['StageStatus', 'SceneResult', 'process_scene', 'run_pipeline', 'resolve_output_path']
