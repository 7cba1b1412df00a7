"""CSV and manifest writers.  CSVs are UTF-8, one header row, ``.`` decimals."""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path
from typing import Iterable, Sequence

TRACE_COLUMNS = ("time_s", "voltage_V", "optical_power_W", "current_A", "conductance_S", "event")


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_trace(path: Path, rows, unit_id: str | None = None) -> Path:
    """Device trace rows (``TraceRow``) in the shared event-log layout."""
    header = TRACE_COLUMNS if unit_id is None else ("unit_id", *TRACE_COLUMNS)
    prefix = () if unit_id is None else (unit_id,)
    return write_csv(path, header, (prefix + tuple(getattr(r, c) for c in TRACE_COLUMNS)
                                    for r in rows))


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(directory: Path, experiment: str, seed, config: dict,
                   artifacts: Iterable[Path], results: dict) -> Path:
    """``manifest.json``: config echo, seed, artifact checksums, results.

    ``created`` is the only time-dependent field and is not part of any checksum.
    """
    directory = Path(directory)
    manifest = {
        "experiment": experiment,
        "seed": seed,
        "config": config,
        "artifacts": {Path(p).name: sha256(p) for p in sorted(artifacts)},
        "results": results,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
