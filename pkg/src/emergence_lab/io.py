"""File formats: TPM JSON/CSV and deterministic JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import TpmValidationError
from .tpm import Tpm, validate_tpm


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    if x == 0:
        return "0.0"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep numeric rows on one line so matrices stay readable
        if indent and all(isinstance(v, (int, float, np.number)) for v in obj):
            return "[" + ", ".join(_encode(v, 0, 0) for v in obj) + "]"
        return "[" + pad + sep.join(_encode(v, indent, level + 1) for v in obj) + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = sep.join(
            json.dumps(k) + ": " + _encode(v, indent, level + 1) for k, v in items
        )
        return "{" + pad + body + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with sorted keys and 17-significant-digit floats.

    Identical inputs always give byte-identical output.
    """
    return _encode(obj, indent, 0) + "\n"


def tpm_to_dict(t: Tpm) -> dict[str, Any]:
    d: dict[str, Any] = {"n": t.n, "rows": t.rows.tolist()}
    if t.labels is not None:
        d["labels"] = list(t.labels)
    return d


def tpm_from_dict(d: dict[str, Any], tol: float = 1e-9) -> Tpm:
    if "rows" not in d:
        raise TpmValidationError("TPM JSON needs a 'rows' field")
    t = validate_tpm(d["rows"], d.get("labels"), tol=tol)
    if "n" in d and int(d["n"]) != t.n:
        raise TpmValidationError(f"declared n={d['n']} but matrix has {t.n} rows")
    return t


def tpm_to_json(t: Tpm) -> str:
    return dumps(tpm_to_dict(t))


def tpm_from_json(text: str) -> Tpm:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TpmValidationError(f"invalid JSON: {exc}") from exc
    return tpm_from_dict(d)


def tpm_to_csv(t: Tpm) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if t.labels is not None:
        w.writerow(t.labels)
    for row in t.rows:
        w.writerow([format_float(float(x)) for x in row])
    return buf.getvalue()


def tpm_from_csv(text: str) -> Tpm:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise TpmValidationError("empty CSV")
    labels = None
    try:
        float(rows[0][0])
    except ValueError:
        labels = [c.strip() for c in rows[0]]
        rows = rows[1:]
    try:
        values = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise TpmValidationError(f"non-numeric CSV cell: {exc}") from exc
    if len({len(r) for r in values}) > 1:
        raise TpmValidationError("ragged CSV rows")
    return validate_tpm(values, labels)


def read_tpm(path: str | Path) -> Tpm:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return tpm_from_csv(text)
    return tpm_from_json(text)
