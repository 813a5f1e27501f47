"""Plain-text plot-data tables: commented metadata header, then tab-separated rows.

Everything a figure needs (units, provenance, column names) rides in the
header so files are diffable and self-describing.  No timestamps here; those
belong to the run manifest so identical runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["write_table", "read_table"]


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_table(path, name: str, columns, rows, metadata: dict | None = None) -> Path:
    path = Path(path)
    lines = [f"# qedft table: {name}"]
    for key, value in (metadata or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append("# columns: " + "\t".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row width {len(row)} does not match {len(columns)} columns")
        lines.append("\t".join(_fmt(v) for v in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_table(path):
    """Parse a table back into (name, metadata, columns, rows-as-strings)."""
    name = None
    metadata: dict[str, str] = {}
    columns: list[str] | None = None
    rows: list[list[str]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("qedft table:"):
                name = body.split(":", 1)[1].strip()
            elif body.startswith("columns:"):
                columns = body.split(":", 1)[1].strip().split("\t")
            elif ":" in body:
                key, value = body.split(":", 1)
                metadata[key.strip()] = value.strip()
            continue
        rows.append(line.split("\t"))
    if columns is None:
        raise ValueError(f"{path}: missing '# columns:' header")
    return name, metadata, columns, rows
