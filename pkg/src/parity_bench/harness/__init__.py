"""
Harness package

Contains the sweep machinery:
- ResultStore: Append-only JSONL record store
- SweepRunner: Parallel, resumable execution of (instance, model) tasks
- summarize / export: Summary tables and file exports
"""

from .export import export, import_records
from .runner import (
    MODEL_NAMES,
    RunSettings,
    SweepRunner,
    SweepSpec,
    run_instance,
    run_sweep,
)
from .store import ResultStore, RunRecord
from .summary import paired_comparison, summarize

__all__ = [
    'MODEL_NAMES',
    'ResultStore',
    'RunRecord',
    'RunSettings',
    'SweepRunner',
    'SweepSpec',
    'export',
    'import_records',
    'paired_comparison',
    'run_instance',
    'run_sweep',
    'summarize',
]
