"""Loading and validation of exported comparison matrices.

The clustering toolchain exports labeled CSV matrices (first row and
first column carry the labels) plus an optional JSON report holding the
per-cluster concept rankings. This module turns those files into a
validated in-memory artifact; all numbers are taken as-is, nothing is
recomputed here.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KINDS = ("composition", "cooccurrence")

# validation slack for values that are contractually within [0, 1]
VALUE_EPS = 1e-9


class ArtifactError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass(frozen=True)
class MatrixArtifact:
    """One exported matrix, ready to render.

    `annotations`, present only when a report file was supplied for a
    composition matrix, holds one tuple of top concept names per row.
    """

    kind: str
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray
    annotations: tuple[tuple[str, ...], ...] | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def _read_labeled_csv(path: str | Path) -> tuple[list[str], list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ArtifactError(f"{path}: expected a labeled matrix, found {len(rows)} rows")
    col_labels = rows[0][1:]
    if not col_labels:
        raise ArtifactError(f"{path}: header carries no column labels")
    row_labels = []
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(col_labels) + 1:
            raise ArtifactError(
                f"{path}: line {lineno}: expected {len(col_labels) + 1} fields, "
                f"got {len(row)}"
            )
        row_labels.append(row[0])
        try:
            values.append([float(x) for x in row[1:]])
        except ValueError as exc:
            raise ArtifactError(f"{path}: line {lineno}: {exc}") from None
    return row_labels, col_labels, np.asarray(values, dtype=np.float64)


def _concept_annotations(
    report_path: str | Path, row_labels: list[str]
) -> tuple[tuple[str, ...], ...]:
    with open(report_path, "r", encoding="utf-8") as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ArtifactError(f"{report_path}: invalid JSON ({exc.msg})") from None
    blocks = report.get("clusters")
    if not isinstance(blocks, list):
        raise ArtifactError(f"{report_path}: missing 'clusters' list")
    by_cluster: dict[str, tuple[str, ...]] = {}
    for block in blocks:
        names = tuple(c["name"] for c in block.get("concepts", ()))
        by_cluster[str(block.get("cluster"))] = names
    return tuple(by_cluster.get(label, ()) for label in row_labels)


def load_artifact(
    path: str | Path,
    kind: str,
    report_path: str | Path | None = None,
) -> MatrixArtifact:
    """Load one matrix CSV and validate it for rendering.

    Raises:
        ArtifactError: unknown kind, ragged rows, values outside [0, 1],
            or (cooccurrence) a non-square matrix / mismatched labels.
    """
    if kind not in KINDS:
        raise ArtifactError(f"kind must be one of {KINDS}, got {kind!r}")
    row_labels, col_labels, values = _read_labeled_csv(path)
    if values.min() < -VALUE_EPS or values.max() > 1.0 + VALUE_EPS:
        raise ArtifactError(
            f"{path}: values outside [0, 1] "
            f"(min {float(values.min())}, max {float(values.max())}); "
            "raw count matrices are not renderable"
        )
    if kind == "cooccurrence":
        if len(row_labels) != len(col_labels):
            raise ArtifactError(
                f"{path}: co-occurrence matrix must be square, "
                f"got {len(row_labels)}x{len(col_labels)}"
            )
        if row_labels != col_labels:
            raise ArtifactError(f"{path}: row and column labels differ")
    annotations = None
    if report_path is not None and kind == "composition":
        annotations = _concept_annotations(report_path, row_labels)
    return MatrixArtifact(
        kind=kind,
        row_labels=tuple(row_labels),
        col_labels=tuple(col_labels),
        values=values,
        annotations=annotations,
    )
