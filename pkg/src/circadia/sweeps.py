"""Deterministic tabular container for parameter sweeps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ValidationError


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    s = str(value)
    if "," in s or "\n" in s or '"' in s:
        s = '"' + s.replace('"', '""') + '"'
    return s


@dataclass
class SweepTable:
    """Rows of a parameter sweep with a units note and a metadata echo.

    Serialization is deterministic: repr-formatted floats, sorted metadata
    keys, no timestamps.
    """

    columns: list[str]
    rows: list[tuple]
    units: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        ncol = len(self.columns)
        for row in self.rows:
            if len(row) != ncol:
                raise ValidationError(
                    f"row width {len(row)} does not match {ncol} columns")

    def to_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# units: {self.units}\n")
            if self.meta:
                f.write("# meta: "
                        + json.dumps(self.meta, sort_keys=True,
                                     separators=(",", ":")) + "\n")
            f.write(",".join(self.columns) + "\n")
            for row in self.rows:
                f.write(",".join(_fmt(v) for v in row) + "\n")

    def to_json(self, path: str) -> None:
        payload = {
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
            "units": self.units,
            "meta": self.meta,
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True, indent=1)
            f.write("\n")
