"""Export of run records and summary tables to files."""

import json
import logging
import os

from ..errors import ConfigurationError, ExportError
from .store import ResultStore
from .summary import summarize

logger = logging.getLogger('parity_bench.export')

EXPORT_FORMATS = ("all", "jsonl", "csv")
RECORDS_FILE = "records.jsonl"
SUMMARY_FILES = {
    "cross_class": "cross_class.csv",
    "size_sweep": "size_sweep.csv",
    "band_grid": "band_grid.csv",
    "score_levels": "score_levels.csv",
    "beta_curves": "beta_curves.csv",
    "recovery_curves": "recovery_curves.csv",
    "paired": "paired_comparison.csv",
}


def export(records, out_dir, fmt="all"):
    """Write records and summaries under out_dir.

    Args:
        records: RunRecords to export.
        out_dir: Destination directory, created if missing.
        fmt: "jsonl" for records, "csv" for summaries, or "all".

    Returns:
        dict: Written file paths keyed by content name.

    Raises:
        ExportError: If a file cannot be written.
    """
    if fmt not in EXPORT_FORMATS:
        raise ConfigurationError(f"unknown export format '{fmt}'")
    records = list(records)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as error:
        raise ExportError(out_dir, error) from error

    written = {}
    if fmt in ("all", "jsonl"):
        path = os.path.join(out_dir, RECORDS_FILE)
        try:
            with open(path, 'w', encoding='utf-8') as file:
                for record in records:
                    file.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
        except OSError as error:
            raise ExportError(path, error) from error
        written["records"] = path

    if fmt in ("all", "csv"):
        for name, table in summarize(records).items():
            path = os.path.join(out_dir, SUMMARY_FILES[name])
            try:
                table.to_csv(path, index=False)
            except OSError as error:
                raise ExportError(path, error) from error
            written[name] = path

    logger.info("✓ Exported %s records to %s (%s files)",
                len(records), out_dir, len(written))
    return written


def import_records(path):
    """Read records written by export or by the result store.

    Raises:
        ExportError: If the file is missing or malformed.
    """
    if not os.path.exists(path):
        raise ExportError(path, "no such file")
    return ResultStore(path).records()
