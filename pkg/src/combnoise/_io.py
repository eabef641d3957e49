"""Deterministic file output: atomic writes and fixed-format CSV/JSON."""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np


def _plain(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def format_value(x) -> str:
    """Scientific notation with 16 significant digits for floats."""
    x = _plain(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.15e}"
    return str(x)


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-combnoise-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path, header, rows, fmt: str = "csv") -> str:
    """Write a table as CSV (default) or a columns/rows JSON document.

    Returns the path actually written (extension follows the format).
    """
    base, _ = os.path.splitext(str(path))
    if fmt == "csv":
        out = base + ".csv"
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(format_value(v) for v in row))
        atomic_write_text(out, "\n".join(lines) + "\n")
    elif fmt == "json":
        out = base + ".json"
        doc = {"columns": list(header),
               "rows": [[_plain(v) for v in row] for row in rows]}
        atomic_write_text(out, json.dumps(doc, indent=2) + "\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return out


def write_json(path, doc) -> str:
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=False) + "\n")
    return str(path)
