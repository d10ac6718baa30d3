"""JSON and CSV report writers.

Every JSON report has the layout::

    {"schema": 1, "version": ..., "command": ..., "generated_at": ...,
     "payload_sha256": ..., "payload": {"config": {...}, ...}}

``payload`` is a pure function of the resolved configuration.  Floats are
rounded to 12 decimal places before serialisation so that the payload, and
its hash, are byte-stable.  ``generated_at`` is the only field outside the hash.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import enum
import hashlib
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .operators import DensityState, PauliString

SCHEMA = 1
FLOAT_DECIMALS = 12


def _clean_float(x: float) -> float | None:
    if math.isnan(x) or math.isinf(x):
        return None
    y = round(float(x), FLOAT_DECIMALS)
    return 0.0 if y == 0 else y


def to_jsonable(obj: Any) -> Any:
    """Convert report values to plain JSON types."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _clean_float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, PauliString):
        return obj.label
    if isinstance(obj, DensityState):
        return to_jsonable(obj.matrix)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": _clean_float(obj.real), "im": _clean_float(obj.imag)}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical_bytes(payload: Any) -> bytes:
    return json.dumps(to_jsonable(payload), sort_keys=True, separators=(",", ":")).encode()


def build_report(command: str, payload: dict, timestamp: Optional[str] = None) -> dict:
    body = to_jsonable(payload)
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "generated_at": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "payload_sha256": hashlib.sha256(canonical_bytes(body)).hexdigest(),
        "payload": body,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_text(path: Optional[str], text: str) -> None:
    """Write to ``path``, or to stdout when ``path`` is None or ``-``."""
    if path in (None, "-"):
        print(text, end="")
        return
    Path(path).write_text(text)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(x) for x in row])
    return buf.getvalue()


def _csv_cell(x: Any) -> Any:
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, (float, np.floating)):
        return repr(_clean_float(x))
    return x
