"""Result tables and their CSV serialisation."""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import metadata as _md
from pathlib import Path
from typing import Sequence

from .exceptions import InvalidArgumentError


def build_id() -> str:
    try:
        version = _md.version("artifact")
    except _md.PackageNotFoundError:
        version = "unknown"
    return f"stobruss-{version}"


@dataclass
class ResultTable:
    """Rectangular table with an ordered metadata header."""

    name: str
    columns: Sequence[str]
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    config_text: str = ""

    def __post_init__(self):
        self.columns = tuple(self.columns)
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise InvalidArgumentError(
                    f"table {self.name!r}: row {i} has {len(row)} values, expected {width}"
                )

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, "dtype"):
        x = float(value)
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    return str(value)


def render_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    for key, value in table.metadata.items():
        buf.write(f"# {key}: {format_value(value)}\n")
    for line in table.config_text.splitlines():
        buf.write(f"# config: {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(table: ResultTable, path) -> Path:
    """Write atomically: a temp file in the target directory, then rename."""
    path = Path(path)
    text = render_csv(table)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_csv(path):
    """``(metadata, columns, rows)`` with numeric cells parsed as float."""
    meta: dict[str, str] = {}
    body = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                if key != "config":
                    meta[key] = value
            else:
                body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = []
    for raw in reader:
        row = []
        for cell in raw:
            try:
                row.append(float(cell) if cell != "" else None)
            except ValueError:
                row.append(cell)
        rows.append(row)
    return meta, columns, rows
