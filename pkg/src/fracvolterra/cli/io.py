"""Result writers: CSV tables, JSON summary and a checksummed manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    timestamp: str
    checksums: dict = field(default_factory=dict)
    complete: bool = True
    error: str | None = None


def format_value(v) -> str:
    """Deterministic text for one cell; floats round-trip with 17 digits."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def csv_bytes(columns, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c, "")) for c in columns])
    return buf.getvalue().encode("utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_results(columns, rows, summary: dict, manifest: RunManifest, out_dir,
                  tables: dict | None = None) -> RunManifest:
    """Write ``paths.csv``, any long-format ``tables`` (name -> (columns, rows)),
    ``summary.json`` and finally ``manifest.json`` with checksums of the rest."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = {"paths.csv": csv_bytes(columns, rows)}
        for name, (cols, trows) in (tables or {}).items():
            files[f"{name}.csv"] = csv_bytes(cols, trows)
        files["summary.json"] = (json.dumps(_jsonable(summary), indent=2, sort_keys=True)
                                 + "\n").encode("utf-8")
        for name, data in files.items():
            (out / name).write_bytes(data)
            manifest.checksums[name] = hashlib.sha256(data).hexdigest()
        (out / "manifest.json").write_text(
            json.dumps(_jsonable(asdict(manifest)), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc.strerror}") from exc
    return manifest
