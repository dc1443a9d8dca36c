# app/storage/measurements.py
"""
Measurement tables and fit reports written into a run directory.

measurements.csv has the fixed header `t,quantity,a,b,p,value,flag`; floats use
repr() (shortest round-trip decimal), p = inf is written as "inf".
"""
import csv
import json
import logging
import math
import os
from typing import Any, Dict, Iterable, List

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["t", "quantity", "a", "b", "p", "value", "flag"]


def format_number(v: Any) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def write_measurements(path: str, rows: Iterable[Dict[str, Any]]) -> int:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([format_number(row.get(c, "")) for c in CSV_COLUMNS])
            count += 1
    logger.debug("wrote %d measurement rows to %s", count, path)
    return count


def read_measurements(path: str) -> List[Dict[str, str]]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _jsonable(v: Any) -> Any:
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "tolist") and callable(v.tolist):
        # numpy scalars and arrays
        return _jsonable(v.tolist())
    return v


def write_json(path: str, payload: Any) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
    return path
