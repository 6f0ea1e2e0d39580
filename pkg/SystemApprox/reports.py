"""Tabular experiment records and their CSV sink.

The CSV dialect is fixed: comma separator, ``.`` decimal point, LF line
endings, ``#``-prefixed comment lines before the header row, floats written
with ``repr`` so every value round-trips exactly.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, TextIO

import numpy as np


def format_cell(value: Any) -> str:
    """Render one cell; None becomes an empty field."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def config_line(config: Dict[str, Any]) -> str:
    """Compact JSON with sorted keys, for the ``# config:`` header."""
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


@dataclass
class ExperimentReport:
    """Rows of one experiment plus the resolved config that produced them.

    Attributes:
        experiment: Experiment or scan name, written as the first comment.
        columns: Column order of the CSV header.
        rows: One dict per row keyed by column name; missing keys are empty.
        config: Fully resolved configuration embedded as a comment line.
        notes: Extra comment lines (bounds, warnings, flags).
    """

    experiment: str
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def add_row(self, **values: Any) -> None:
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError(f"Unknown report columns {sorted(unknown)}. Available columns: {self.columns}")
        self.rows.append(values)

    def column(self, name: str, row_kind: Optional[str] = None) -> List[Any]:
        """Values of one column, optionally restricted to rows whose ``row`` equals ``row_kind``."""
        if name not in self.columns:
            raise KeyError(f"Unknown report column '{name}'. Available columns: {self.columns}")
        return [r.get(name) for r in self.rows if row_kind is None or r.get("row") == row_kind]

    def write_csv(self, stream: TextIO) -> None:
        stream.write(f"# experiment: {self.experiment}\n")
        if self.config:
            stream.write(f"# config: {config_line(self.config)}\n")
        for note in self.notes:
            stream.write(f"# {note}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(row.get(c)) for c in self.columns])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def save(self, path: str) -> None:
        """Write the report to ``path`` (UTF-8, LF line endings)."""
        with open(path, "w", newline="", encoding="utf-8") as f:
            self.write_csv(f)


__all__ = ["ExperimentReport", "format_cell", "config_line"]
