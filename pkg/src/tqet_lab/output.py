"""Deterministic CSV / JSON-lines emission.

Floats use fixed scientific notation with 17 significant digits and no
locale dependence, so identical runs produce byte-identical files.  Every
file starts with a provenance comment line.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__


def provenance(config_hash: str) -> str:
    return f"# tqet-lab {__version__} config-hash={config_hash}"


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.16e}"
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return None if not math.isfinite(x) else float(f"{x:.16e}")
    return str(value)


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence], config_hash: str, fmt_kind: str = "csv") -> list[Path]:
    """Write ``rows`` as ``<path>.csv`` and/or ``<path>.jsonl``; returns the files written."""
    rows = [list(r) for r in rows]
    for r in rows:
        if len(r) != len(header):
            raise ValueError(f"row has {len(r)} fields, header has {len(header)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt_kind in ("csv", "both"):
        target = path.with_suffix(".csv")
        lines = [provenance(config_hash), ",".join(header)]
        lines += [",".join(fmt(v) for v in r) for r in rows]
        with open(target, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(target)
    if fmt_kind in ("json", "both"):
        target = path.with_suffix(".jsonl")
        lines = [provenance(config_hash)]
        lines += [json.dumps(dict(zip(header, map(_json_value, r))), allow_nan=False) for r in rows]
        with open(target, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(target)
    return written


def read_csv(path) -> tuple[list[str], list[list[str]], str]:
    """Parse a file written by :func:`write_table`: ``(header, rows, provenance line)``."""
    lines = Path(path).read_text().splitlines()
    return lines[1].split(","), [ln.split(",") for ln in lines[2:]], lines[0]
