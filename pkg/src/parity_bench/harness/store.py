"""Result store for the harness.

Records are appended one JSON object per line and never rewritten. The
set of completed keys is loaded at start so a rerun skips finished work.
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field

from .. import __version__
from ..errors import ExportError

logger = logging.getLogger('parity_bench.store')

STATUS_OK = "ok"
STATUS_DIVERGED = "diverged"
STATUS_FAILED = "failed"


def record_key(identity, model, config_version):
    """Content hash of (instance identity, model, config version)."""
    payload = json.dumps(
        {"instance": identity, "model": model, "config": config_version},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()


@dataclass
class RunRecord:
    """Outcome of one (instance, model) run.

    Attributes:
        key: Content hash identifying the run.
        instance: BenchmarkConfig identity of the instance.
        model: Model name from the harness registry.
        status: ok, diverged or failed.
        metrics: Serialised metrics, None when the run did not finish.
        params: Serialised trained parameters, None for untrained models.
        loss_trace: Per-step training loss, empty for untrained models.
        train_checksum: Checksum of the shared training multiset.
        band_checksum: Checksum of the shared parity band.
        wall_clock: Seconds spent on the run.
        error: Failure message when status is not ok.
    """

    key: str
    instance: dict
    model: str
    config_version: str
    status: str = STATUS_OK
    metrics: dict = None
    params: dict = None
    loss_trace: list = field(default_factory=list)
    train_checksum: str = None
    band_checksum: str = None
    wall_clock: float = 0.0
    error: str = None
    version: str = __version__

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    @property
    def ok(self):
        return self.status == STATUS_OK


class ResultStore:
    """Append-only JSONL store of RunRecords."""

    def __init__(self, path):
        """Initialize the store and load the keys already written.

        Args:
            path (str): Location of the JSONL file.
        """
        self.path = str(path)
        self._tail_checked = False
        self.completed = self._load_completed()

    def _load_completed(self):
        """Load keys of records already in the file.

        Returns:
            set: Keys of stored records.
        """
        return {record.key for record in self.records()}

    def records(self):
        """Read every stored record.

        An unterminated last line is what a killed append leaves behind; it
        is skipped with a warning so its task reruns.

        Returns:
            list: RunRecords in file order.

        Raises:
            ExportError: If the file cannot be read or a complete line
                cannot be parsed.
        """
        if not os.path.exists(self.path):
            return []
        records = []
        try:
            with open(self.path, 'r', encoding='utf-8') as file:
                for number, raw in enumerate(file, start=1):
                    line = raw.strip()
                    if not line:
                        continue
                    try:
                        records.append(RunRecord.from_dict(json.loads(line)))
                    except (ValueError, TypeError) as error:
                        if not raw.endswith("\n"):
                            logger.warning(
                                "Skipping partial record at %s line %s: %s",
                                self.path, number, error,
                            )
                            continue
                        raise ExportError(
                            self.path, f"line {number}: {error}"
                        ) from error
        except OSError as error:
            raise ExportError(self.path, error) from error
        return records

    def _repair_tail(self):
        """Terminate or drop an unterminated last line before appending."""
        if self._tail_checked:
            return
        self._tail_checked = True
        if not os.path.exists(self.path) or os.path.getsize(self.path) == 0:
            return
        with open(self.path, 'rb+') as file:
            file.seek(-1, os.SEEK_END)
            if file.read(1) == b"\n":
                return
            file.seek(0)
            data = file.read()
            start = data.rfind(b"\n") + 1
            try:
                RunRecord.from_dict(json.loads(data[start:].decode('utf-8')))
            except (ValueError, TypeError):
                logger.warning("Dropping partial record at the end of %s",
                               self.path)
                file.truncate(start)
            else:
                file.write(b"\n")

    def append(self, record):
        """Write one record and mark its key as completed.

        Args:
            record (RunRecord): The record to persist.
        """
        directory = os.path.dirname(self.path)
        try:
            if directory:
                os.makedirs(directory, exist_ok=True)
            self._repair_tail()
            with open(self.path, 'a', encoding='utf-8') as file:
                file.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
        except OSError as error:
            raise ExportError(self.path, error) from error
        self.completed.add(record.key)

    def __contains__(self, key):
        return key in self.completed

    def __len__(self):
        return len(self.completed)
