"""Imputation and label encoding."""

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.data.schema import ColumnKind
from src.data.table import Column, Table
from src.utils.logger import app_logger as logger

ALL_MISSING_CATEGORY = "__ALL_MISSING__"


def lower_median(values: np.ndarray) -> float:
    """Median that always returns an element of ``values`` (lower middle on even counts)."""
    k = (len(values) - 1) // 2
    return float(np.partition(values, k)[k])


def modal_category(values: Sequence[str]) -> str:
    """Most frequent category; ties go to the lexicographically smallest."""
    counts = Counter(values)
    best = max(counts.values())
    return min(c for c, n in counts.items() if n == best)


def _impute_column(kind: ColumnKind, column: Column) -> Column:
    if not column.missing.any():
        return column
    present = column.values[~column.missing]
    if kind == ColumnKind.NUMERIC:
        fill = lower_median(present.astype(np.float64)) if len(present) else 0.0
        values = column.values.copy()
        values[column.missing] = fill
        return Column.numeric(values)
    fill_category = modal_category(list(present)) if len(present) else ALL_MISSING_CATEGORY
    values = column.values.copy()
    values[column.missing] = fill_category
    return Column.text(list(values))


def impute(table: Table, max_workers: Optional[int] = None) -> Table:
    """Fill missing numeric values with the column median and categoricals with the mode.

    Key and target columns are left untouched. Columns that are entirely missing
    become 0 (numeric) or ``__ALL_MISSING__`` (categorical).

    Args:
        table: Input table
        max_workers: Threads for column-parallel imputation (None = sequential)

    Returns:
        Table with no missing feature values
    """
    targets = [
        (name, kind)
        for name, kind in table.schema.columns
        if kind in (ColumnKind.NUMERIC, ColumnKind.CATEGORICAL)
    ]

    def work(item: Tuple[str, ColumnKind]) -> Column:
        name, kind = item
        return _impute_column(kind, table.columns[name])

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            filled = list(executor.map(work, targets))
    else:
        filled = [work(item) for item in targets]

    n_filled = sum(int(table.columns[name].missing.sum()) for name, _ in targets)
    logger.info(f"Imputed {n_filled} missing cells across {len(targets)} feature columns")
    return table.replace(table.schema, {name: col for (name, _), col in zip(targets, filled)})


@dataclass(frozen=True)
class EncodingMap:
    """Per categorical column: category -> dense integer code.

    The code ``len(mapping)`` is reserved for categories never seen at fit time.
    """

    mappings: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    def unseen_code(self, column: str) -> int:
        return len(self.mappings[column])

    def encode(self, column: str, values: Sequence[Optional[str]]) -> np.ndarray:
        mapping = self.mappings[column]
        reserved = len(mapping)
        return np.fromiter(
            (mapping.get(v, reserved) if v is not None else reserved for v in values),
            dtype=np.float64,
            count=len(values),
        )

    def decode(self, column: str, codes: Sequence[float]) -> List[Optional[str]]:
        """Map codes back to category strings; the reserved code decodes to None."""
        inverse = {code: category for category, code in self.mappings[column].items()}
        return [inverse.get(int(c)) for c in codes]

    def apply(self, table: Table) -> Table:
        """Encode a table with this map (e.g. test data); unseen categories get the reserved code."""
        schema = table.schema
        updates: Dict[str, Column] = {}
        for name in self.mappings:
            if name not in schema:
                continue
            updates[name] = Column.numeric(self.encode(name, list(table.columns[name].values)))
            schema = schema.with_kind(name, ColumnKind.NUMERIC)
        return table.replace(schema, updates)

    def to_dict(self) -> Dict[str, Dict[str, int]]:
        return {column: dict(mapping) for column, mapping in self.mappings.items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Mapping[str, int]]) -> "EncodingMap":
        return cls({column: dict(mapping) for column, mapping in data.items()})


def label_encode(table: Table) -> Tuple[Table, EncodingMap]:
    """Replace categorical columns by integer codes in first-appearance order.

    Args:
        table: Imputed table

    Returns:
        (encoded table with those columns retyped numeric, EncodingMap)
    """
    mappings: Dict[str, Dict[str, int]] = {}
    for name in table.schema.names_of(ColumnKind.CATEGORICAL):
        column = table.columns[name]
        if column.missing.any():
            logger.warning(f"Column {name} has missing categories at encode time; they get the reserved code")
        mapping: Dict[str, int] = {}
        for value in column.values:
            if value is not None and value not in mapping:
                mapping[value] = len(mapping)
        mappings[name] = mapping

    encoding = EncodingMap(mappings)
    logger.info(f"Label-encoded {len(mappings)} categorical columns")
    return encoding.apply(table), encoding
