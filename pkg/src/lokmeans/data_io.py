"""Dataset ingestion: CSV loading, duplicate merging, domain filtering, synthesis."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .divergence import ITAKURA_SAITO, KL, DivergenceSpec
from .model import Dataset


class CsvFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RawTable:
    """Parsed rows before merging; weights is None when no column was given."""

    rows: np.ndarray
    weights: np.ndarray | None


def load_csv(path: str, skip_header: bool = False, weight_column: int | None = None) -> RawTable:
    """Parse a UTF-8 comma-separated file of numeric rows.

    ``weight_column`` is a zero-based index into the raw columns; the
    remaining columns become coordinates. Errors carry one-based row and
    column locations.
    """
    records: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        for row_index, row in enumerate(reader, start=1):
            if skip_header and row_index == 1:
                continue
            if not row:
                continue
            values = []
            for col_index, cell in enumerate(row, start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: row {row_index}, column {col_index}: not a number: {cell!r}"
                    ) from None
                if not np.isfinite(value):
                    raise CsvFormatError(
                        f"{path}: row {row_index}, column {col_index}: non-finite value"
                    )
                values.append(value)
            if records and len(values) != len(records[0]):
                raise CsvFormatError(
                    f"{path}: row {row_index}: expected {len(records[0])} columns, got {len(values)}"
                )
            records.append(values)
    if not records:
        raise CsvFormatError(f"{path}: no data rows")

    table = np.asarray(records, dtype=np.float64)
    if weight_column is None:
        return RawTable(table, None)
    if not 0 <= weight_column < table.shape[1]:
        raise CsvFormatError(
            f"{path}: weight column {weight_column} out of range for {table.shape[1]} columns"
        )
    weights = table[:, weight_column]
    if (weights <= 0.0).any():
        bad = int(np.flatnonzero(weights <= 0.0)[0])
        raise CsvFormatError(f"{path}: row {bad + 1}: weight must be positive")
    rows = np.delete(table, weight_column, axis=1)
    if rows.shape[1] == 0:
        raise CsvFormatError(f"{path}: no coordinate columns besides the weight column")
    return RawTable(rows, weights)


def dedup_merge(raw: RawTable) -> Dataset:
    """Merge bitwise-identical rows, summing weights, keeping first-seen order."""
    rows = np.ascontiguousarray(raw.rows, dtype=np.float64)
    weights = (
        np.ones(rows.shape[0], dtype=np.float64)
        if raw.weights is None
        else np.asarray(raw.weights, dtype=np.float64)
    )
    index: dict[bytes, int] = {}
    unique_rows: list[np.ndarray] = []
    merged: list[float] = []
    for row, weight in zip(rows, weights):
        key = row.tobytes()
        slot = index.get(key)
        if slot is None:
            index[key] = len(unique_rows)
            unique_rows.append(row)
            merged.append(float(weight))
        else:
            merged[slot] += float(weight)
    return Dataset(np.asarray(unique_rows), np.asarray(merged))


def filter_domain(dataset: Dataset, spec: DivergenceSpec) -> tuple[Dataset, list[int]]:
    """Drop dimensions that violate the divergence domain; re-merge afterwards.

    Only the KL and Itakura-Saito divergences constrain the domain: any
    dimension containing a non-positive value is removed. Projection can
    make previously distinct rows coincide, so duplicates are re-merged
    (weights summed). Returns the dataset and the dropped dimension indices.
    """
    if spec.kind not in (KL, ITAKURA_SAITO):
        return dataset, []
    keep = (dataset.points > 0.0).all(axis=0)
    dropped = [int(j) for j in np.flatnonzero(~keep)]
    if not dropped:
        return dataset, []
    if not keep.any():
        raise ValueError(f"every dimension violates the domain of {spec.kind}")
    return dedup_merge(RawTable(dataset.points[:, keep], dataset.weights)), dropped


def synth_uniform_grid(n: int, d: int, seed: int) -> Dataset:
    """n integer points drawn uniformly from {1..10}^d, duplicates merged.

    Multiplicity becomes the weight, so total weight equals n while the
    number of distinct points is at most 10**d.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    points = rng.integers(1, 11, size=(n, d)).astype(np.float64)
    return dedup_merge(RawTable(points, None))


def counterexample_instance() -> tuple[Dataset, np.ndarray]:
    """Fixed five-point line where plain K-means stalls at a non-local fixed point.

    Returns the unit-weight dataset and the initial centers that lead the
    assignment sweep into a cross-cluster tie it cannot escape.
    """
    points = np.array([[-4.0], [-2.0], [0.0], [1.5], [2.5]])
    dataset = Dataset(points, np.ones(5))
    initial_centers = np.array([[0.0], [2.5]])
    return dataset, initial_centers
