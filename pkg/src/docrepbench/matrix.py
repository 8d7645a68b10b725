"""Dense feature matrix shared by all representation models."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class FeatureMatrix:
    """Real-valued features for a document set.

    rows is n_docs x n_features; column_names label the features and
    doc_ids the rows. Entries must be finite.
    """

    rows: np.ndarray
    column_names: list[str]
    doc_ids: list[str]

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2:
            raise ValueError("feature rows must be a 2-D array")
        if self.rows.shape[0] != len(self.doc_ids):
            raise ValueError(
                f"{self.rows.shape[0]} rows for {len(self.doc_ids)} doc ids"
            )
        if self.rows.shape[1] != len(self.column_names):
            raise ValueError(
                f"{self.rows.shape[1]} columns for {len(self.column_names)} names"
            )
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("feature matrix contains NaN or infinite entries")

    @property
    def n_docs(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def to_csv(self, path: str | Path, header_comments: dict[str, str] | None = None) -> None:
        """Write as CSV: optional '# key=value' comment lines, then a
        header row (docId plus column names), then one row per document."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            for key, value in (header_comments or {}).items():
                fh.write(f"# {key}={value}\n")
            writer = csv.writer(fh)
            writer.writerow(["docId"] + self.column_names)
            for doc_id, row in zip(self.doc_ids, self.rows):
                writer.writerow([doc_id] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureMatrix":
        with Path(path).open(encoding="utf-8", newline="") as fh:
            reader = csv.reader(line for line in fh if not line.startswith("#"))
            header = next(reader)
            doc_ids, rows = [], []
            for record in reader:
                doc_ids.append(record[0])
                rows.append([float(v) for v in record[1:]])
        return cls(
            rows=np.array(rows, dtype=float).reshape(len(doc_ids), len(header) - 1),
            column_names=header[1:],
            doc_ids=doc_ids,
        )
