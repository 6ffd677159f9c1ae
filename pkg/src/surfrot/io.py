"""Byte-stable emission of reports and series."""
import csv
import hashlib
import io
import json
import math
import os
from fractions import Fraction

import numpy as np

from .exceptions import EmitRefused

SIG_DIGITS = 12


def _fmt_float(x, path):
    if not math.isfinite(x):
        raise EmitRefused(f"non-finite value {x!r} at {path or '<root>'}")
    if x == 0.0:
        return 0.0
    return float(f"{x:.{SIG_DIGITS}g}")


def canonical(obj, path=""):
    """Convert a report into plain JSON types with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): canonical(v, f"{path}.{k}") for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v, f"{path}[{i}]") for i, v in enumerate(obj)]
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist(), path)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj), path)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_fmt_float(obj.real, path + ".re"), _fmt_float(obj.imag, path + ".im")]
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return canonical(obj.to_dict(), path)
    if hasattr(obj, "coords"):
        return [str(c) for c in obj.coords]
    raise TypeError(f"cannot emit {type(obj).__name__} at {path}")


def dumps(report):
    return json.dumps(canonical(report), sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def config_hash(config):
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for i, row in enumerate(rows):
        out = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                v = f"{_fmt_float(float(v), f'row {i}'):.{SIG_DIGITS}g}"
            elif isinstance(v, Fraction):
                v = str(v)
            out.append(v)
        w.writerow(out)
    return buf.getvalue()


def emit(report, out_dir, name, fmt="json", series=None):
    """Write ``report`` (and optional CSV series) and return the written paths.

    ``series`` maps a file stem to ``(header, rows)``.  Text is fully
    rendered before any file is opened so a refused value writes nothing.
    """
    texts = {}
    if fmt == "json":
        texts[f"{name}.json"] = dumps(report)
    elif fmt == "csv":
        flat = _flatten(canonical(report))
        texts[f"{name}.csv"] = csv_text(["key", "value"], sorted(flat.items()))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    for stem, (header, rows) in (series or {}).items():
        texts[f"{stem}.csv"] = csv_text(header, rows)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for fname in sorted(texts):
        p = os.path.join(out_dir, fname)
        with open(p, "w", newline="") as fh:
            fh.write(texts[fname])
        paths.append(p)
    return paths


def _flatten(obj, prefix=""):
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}.{k}" if prefix else k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out.update(_flatten(v, f"{prefix}[{i}]"))
    else:
        out[prefix] = "" if obj is None else (f"{obj:.{SIG_DIGITS}g}" if isinstance(obj, float) else str(obj))
    return out
