"""Columnar dataset container and its CSV wire format.

Discrete columns are stored as integer state indices with an explicit ordered
domain; continuous columns (surrogate raw scores, questionnaire totals) as
float arrays. CSV cells carry state labels for discrete columns, so files are
readable without the network in hand.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed dataset: unknown column, out-of-domain value, ragged rows."""


@dataclass
class DatasetTable:
    domains: dict[str, tuple[str, ...]]
    discrete: dict[str, np.ndarray] = field(default_factory=dict)
    continuous: dict[str, np.ndarray] = field(default_factory=dict)
    ids: np.ndarray | None = None  # optional per-record user id

    def __post_init__(self):
        for name in self.domains:
            if name not in self.discrete:
                raise DataError(f"discrete column {name!r} missing data")
        for name, col in self.discrete.items():
            domain = self.domains.get(name)
            if domain is None:
                raise DataError(f"column {name!r} has no declared domain")
            col = np.asarray(col, dtype=np.int64)
            if col.size and (col.min() < 0 or col.max() >= len(domain)):
                raise DataError(f"column {name!r} has values outside its domain")
            self.discrete[name] = col
        for name, col in self.continuous.items():
            self.continuous[name] = np.asarray(col, dtype=float)
        lengths = {len(c) for c in self.discrete.values()}
        lengths |= {len(c) for c in self.continuous.values()}
        if self.ids is not None:
            self.ids = np.asarray(self.ids, dtype=np.int64)
            lengths.add(len(self.ids))
        if len(lengths) > 1:
            raise DataError("columns have differing lengths")
        self.n_rows = lengths.pop() if lengths else 0

    def labels(self, name: str) -> list[str]:
        domain = self.domains[name]
        return [domain[i] for i in self.discrete[name]]

    def subset(self, mask: np.ndarray) -> "DatasetTable":
        return DatasetTable(
            domains=dict(self.domains),
            discrete={k: v[mask] for k, v in self.discrete.items()},
            continuous={k: v[mask] for k, v in self.continuous.items()},
            ids=None if self.ids is None else self.ids[mask],
        )

    def column_order(self) -> list[str]:
        order = [] if self.ids is None else ["user_id"]
        return order + list(self.discrete) + list(self.continuous)


def save_csv(table: DatasetTable, path: str | Path):
    """Write the table with a header row; deterministic byte-for-byte."""
    header = table.column_order()
    label_cols = {name: table.labels(name) for name in table.discrete}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(table.n_rows):
            row = []
            for name in header:
                if name == "user_id":
                    row.append(str(int(table.ids[i])))
                elif name in table.discrete:
                    row.append(label_cols[name][i])
                else:
                    value = table.continuous[name][i]
                    row.append(str(int(value)) if float(value).is_integer() else repr(float(value)))
            writer.writerow(row)


def load_csv(path: str | Path, domains: dict[str, tuple[str, ...]]) -> DatasetTable:
    """Read a CSV; columns present in `domains` are discrete, the rest float."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    columns = {name: [row[j] for row in rows] for j, name in enumerate(header)}

    discrete, continuous, ids = {}, {}, None
    for name, cells in columns.items():
        if name == "user_id":
            ids = np.array([int(c) for c in cells], dtype=np.int64)
        elif name in domains:
            lookup = {label: i for i, label in enumerate(domains[name])}
            try:
                discrete[name] = np.array([lookup[c] for c in cells], dtype=np.int64)
            except KeyError as exc:
                raise DataError(f"value {exc.args[0]!r} outside domain of column {name!r}") from None
        else:
            continuous[name] = np.array([float(c) for c in cells])
    used_domains = {name: domains[name] for name in discrete}
    return DatasetTable(domains=used_domains, discrete=discrete, continuous=continuous, ids=ids)
