"""Report emission: one JSON report, one text rendering, side files.

The JSON report is byte-identical across reruns on identical inputs (keys
sorted, no timestamps); the text rendering is produced from the same dict
so the two never disagree on a value.
"""
from __future__ import annotations

import csv
import json
import os

import numpy as np


def _sanitize(value):
    """Coerce numpy scalars/arrays to plain Python for stable JSON."""
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_sanitize(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _render(value, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for key in value:
            v = value[key]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{key}:")
                lines.extend(_render(v, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(v)}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_render(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(f"{pad}{_scalar(value)}")
    return lines


def _scalar(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)) and not v:
        return "(none)"
    return str(v)


def emit_report(report: dict, outdir) -> dict:
    """Write report.json and report.txt; returns the written paths."""
    report = _sanitize(report)
    os.makedirs(outdir, exist_ok=True)
    json_path = os.path.join(outdir, "report.json")
    txt_path = os.path.join(outdir, "report.txt")
    with open(json_path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(txt_path, "w") as fh:
        fh.write("\n".join(_render(report)) + "\n")
    return {"json": json_path, "txt": txt_path}


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
