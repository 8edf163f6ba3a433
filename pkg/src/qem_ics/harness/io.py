"""CSV tables with JSON metadata sidecars."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np

from .. import __version__

GIT_REVISION = "unknown"  # placeholder; the package is not tied to a checkout


@dataclass
class Table:
    """Named rows with a fixed column order."""

    name: str
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)

    def add(self, **values) -> None:
        missing = set(self.columns) - set(values)
        extra = set(values) - set(self.columns)
        if missing or extra:
            raise KeyError(f"row mismatch for {self.name}: missing {sorted(missing)}, extra {sorted(extra)}")
        self.rows.append([values[c] for c in self.columns])

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    return "" if v is None else str(v)


def write_table(table: Table, directory: Union[str, Path], metadata: dict) -> Path:
    """Write ``<name>.csv`` and ``<name>.meta.json``; returns the CSV path."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{table.name}.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])
    meta = dict(metadata)
    meta.update(table=table.name, columns=table.columns, rows=len(table.rows), package_version=__version__, git_revision=GIT_REVISION)
    (out / f"{table.name}.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_table(path: Union[str, Path]) -> Table:
    """Read a CSV written by ``write_table``; numeric cells become floats."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        rows = [[_parse(c) for c in r] for r in reader if r]
    return Table(path.stem, columns, rows)


def _parse(cell: str) -> Any:
    try:
        return float(cell)
    except ValueError:
        return cell


def table_from_records(name: str, records: Sequence[dict]) -> Table:
    if not records:
        raise ValueError("no records")
    t = Table(name, list(records[0]))
    for r in records:
        t.add(**r)
    return t
