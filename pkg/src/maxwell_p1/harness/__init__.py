"""Convergence-study orchestration and reporting."""

from .config import ConfigError, StudyConfig, parse_config
from .output import emit_csv, emit_json, emit_svg, emit_table, load_json
from .study import RunRecord, SlopeFit, StudyResult, run_case, run_study

__all__ = [
    "ConfigError",
    "RunRecord",
    "SlopeFit",
    "StudyConfig",
    "StudyResult",
    "emit_csv",
    "emit_json",
    "emit_svg",
    "emit_table",
    "load_json",
    "parse_config",
    "run_case",
    "run_study",
]
