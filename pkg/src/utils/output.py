"""
CSV and JSON writers for curves, tables and summaries.

Every file lands inside the run's output directory; nothing is written elsewhere.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from utils.logger import setup_logger

logger = setup_logger(__name__)


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ('inf' if value > 0 else '-inf')
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _format_cell(value: Any) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, rows: Sequence[Mapping[str, Any]], columns: Optional[List[str]] = None) -> Path:
    """
    Write rows as CSV with one header row.

    Args:
        path: Target file
        rows: Row dictionaries
        columns: Column order (defaults to the keys of the first row)

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = columns or (list(rows[0].keys()) if rows else [])

    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row.get(col, '')) for col in columns])

    logger.debug(f"Wrote {len(rows)} rows to {path}")
    return path


def write_json(path: Path, payload: Any) -> Path:
    """Write a JSON document with sorted keys and a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, 'w') as f:
        json.dump(_plain(payload), f, indent=2, sort_keys=True)
        f.write('\n')

    logger.debug(f"Wrote JSON to {path}")
    return path


def write_table(
    out_dir: Path,
    stem: str,
    rows: Sequence[Mapping[str, Any]],
    fmt: str = 'csv',
    columns: Optional[List[str]] = None
) -> Path:
    """Write tabular output as <stem>.csv or <stem>.json depending on fmt."""
    if fmt == 'json':
        keys = columns or (list(rows[0].keys()) if rows else [])
        return write_json(Path(out_dir) / f"{stem}.json", [{k: row.get(k) for k in keys} for row in rows])
    return write_csv(Path(out_dir) / f"{stem}.csv", rows, columns)


def read_csv(path: Path) -> List[Dict[str, str]]:
    """Read a CSV written by write_csv (used by tests and re-runs)."""
    with open(path, 'r', newline='') as f:
        return list(csv.DictReader(f))


def format_lambda(lam: float) -> str:
    """Stable file-name token for a lambda value (5 -> '5', 0.1 -> '0.1')."""
    text = f"{lam:g}"
    return text.replace('+', '')


def iter_lines(rows: Iterable[Mapping[str, Any]], columns: List[str]) -> Iterable[str]:
    """Render rows as aligned text lines for console summaries."""
    yield '  '.join(f"{c:>12}" for c in columns)
    for row in rows:
        yield '  '.join(f"{_format_cell(row.get(c, ''))[:12]:>12}" for c in columns)
