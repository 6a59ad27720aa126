"""Tidy CSV and JSON writers that stamp every file with the tool version and config hash."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from fakenews import __version__

TOOL = "fakenews"


def _plain(obj: Any) -> Any:
    """Convert numpy and enum values into JSON-ready builtins."""
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), (str, int)):
        return obj.value
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def config_hash(config: Mapping[str, Any]) -> str:
    blob = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def header_line(chash: str) -> str:
    return f"# {TOOL} {__version__} config={chash}"


def _cell(v: Any) -> Any:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "" if math.isnan(v) else repr(v)
    return _plain(v)


def write_csv(path: Path, rows: Iterable[Mapping[str, Any]], fieldnames: Sequence[str],
              chash: Optional[str] = None) -> Path:
    """Write rows under a comment line carrying version and config hash; NaN becomes empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        if chash is not None:
            fh.write(header_line(chash) + "\n")
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in fieldnames})
    return path


def write_json(path: Path, payload: Mapping[str, Any], chash: Optional[str] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"_meta": {"tool": TOOL, "version": __version__, "config_hash": chash}}
    body.update(_plain(payload))
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_csv_rows(path: Path) -> list[dict]:
    """Rows of a CSV written by :func:`write_csv` (comment lines skipped)."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
