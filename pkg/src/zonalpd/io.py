"""CSV and JSON helpers with 17-significant-digit round-trip floats."""

from __future__ import annotations

import csv
import json
import math
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

SCHEMA_VERSION = "1"


def fmt(x) -> str:
    """Round-trip decimal form with 17 significant digits."""
    return f"{float(x):.17g}"


def write_csv(path, header, rows, comments=()) -> None:
    """Comma-delimited rows with '#' comment lines and a header line."""
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        if header:
            writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in np.atleast_1d(row)])


def read_csv(path) -> np.ndarray:
    """Numeric rows of a CSV file; '#' lines and a non-numeric header are skipped."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                if rows:
                    raise ValueError(f"{path}:{lineno}: non-numeric entry") from None
                continue  # header
    if not rows:
        raise ValueError(f"{path}: no numeric rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    return np.array(rows, dtype=float)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(payload: dict) -> str:
    """JSON text with a top-level schema version; floats round-trip exactly, NaN and inf become null."""
    body = {"schema": SCHEMA_VERSION}
    body.update(_clean(payload))
    return json.dumps(body, indent=2, sort_keys=False) + "\n"


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("zonalpd").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def validate(payload: dict, name: str) -> None:
    """Raise jsonschema.ValidationError unless payload matches schemas/<name>.json."""
    jsonschema.validate(payload, load_schema(name))
