"""Immutable columnar table with explicit missing masks."""

from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from src.data.schema import ColumnKind, Schema
from src.utils.errors import SchemaError
from src.utils.logger import app_logger as logger

TEXT_KINDS = (ColumnKind.CATEGORICAL, ColumnKind.KEY)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Column:
    """Value vector plus missing mask.

    Numeric and target columns hold float64 with NaN in missing slots;
    categorical and key columns hold strings with None in missing slots.
    """

    values: np.ndarray
    missing: np.ndarray

    @classmethod
    def numeric(cls, values: Sequence[Any]) -> "Column":
        array = np.array(values, dtype=np.float64)
        return cls(_frozen(array), _frozen(np.isnan(array)))

    @classmethod
    def text(cls, values: Sequence[Optional[str]]) -> "Column":
        array = np.empty(len(values), dtype=object)
        array[:] = [None if v is None else str(v) for v in values]
        missing = np.fromiter((v is None for v in array), dtype=bool, count=len(array))
        return cls(_frozen(array), _frozen(missing))

    def __len__(self) -> int:
        return len(self.values)

    def take(self, indices: np.ndarray) -> "Column":
        return Column(_frozen(self.values[indices]), _frozen(self.missing[indices]))


@dataclass(frozen=True)
class Table:
    """Columnar dataset; every operation returns a new table."""

    schema: Schema
    columns: Mapping[str, Column]

    def __post_init__(self):
        if set(self.columns) != set(self.schema.names):
            raise SchemaError(
                f"columns {sorted(self.columns)} do not match schema {sorted(self.schema.names)}"
            )
        lengths = {len(col) for col in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths: {sorted(lengths)}")
        object.__setattr__(self, "columns", MappingProxyType(dict(self.columns)))

    @classmethod
    def from_arrays(cls, schema: Schema, data: Mapping[str, Sequence[Any]]) -> "Table":
        """Build a table from raw value sequences, deriving missing masks.

        Args:
            schema: Column declarations
            data: Column name to values (NaN / None mark missing)

        Returns:
            New Table
        """
        columns: Dict[str, Column] = {}
        for name, kind in schema.columns:
            values = data[name]
            columns[name] = Column.text(list(values)) if kind in TEXT_KINDS else Column.numeric(values)
        return cls(schema, columns)

    @property
    def n_rows(self) -> int:
        if not self.columns:
            return 0
        return len(next(iter(self.columns.values())))

    def column(self, name: str) -> Column:
        if name not in self.columns:
            raise ValueError(f"unknown column: {name}")
        return self.columns[name]

    def take(self, indices: Sequence[int]) -> "Table":
        """Select rows by position, preserving the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return Table(self.schema, {name: col.take(idx) for name, col in self.columns.items()})

    def replace(self, schema: Schema, updates: Mapping[str, Column]) -> "Table":
        columns = {name: updates.get(name, self.columns.get(name)) for name in schema.names}
        return Table(schema, columns)

    @property
    def feature_names(self) -> List[str]:
        return self.schema.feature_names

    def labels(self) -> np.ndarray:
        """Target column as int64 0/1 labels.

        Raises:
            ValueError: If the table is unlabeled or labels are missing / not binary
        """
        target = self.schema.target
        if target is None:
            raise ValueError("table has no target column")
        col = self.columns[target]
        if col.missing.any():
            raise ValueError(f"target column {target} has {int(col.missing.sum())} missing labels")
        labels = col.values.astype(np.int64)
        if not np.all((labels == 0) | (labels == 1)) or not np.array_equal(labels, col.values):
            raise ValueError(f"target column {target} must contain only 0/1")
        return labels

    def to_matrix(self, names: Optional[Sequence[str]] = None) -> np.ndarray:
        """Stack numeric feature columns into a float64 matrix.

        Args:
            names: Columns to include (default: all feature columns)

        Returns:
            Array of shape (n_rows, len(names))

        Raises:
            ValueError: If a column is non-numeric or still has missing values
        """
        names = list(names) if names is not None else self.feature_names
        matrix = np.empty((self.n_rows, len(names)), dtype=np.float64)
        for j, name in enumerate(names):
            col = self.column(name)
            if self.schema.kind(name) in TEXT_KINDS:
                raise ValueError(f"column {name} is not numeric; encode it first")
            if col.missing.any():
                raise ValueError(f"column {name} has missing values; impute first")
            matrix[:, j] = col.values
        return matrix


def left_join(left: Table, right: Table, key: str) -> Table:
    """Append right's columns to every left row matched on ``key``.

    Args:
        left: Table whose rows and order are preserved
        right: Table with unique key values
        key: Join column present in both tables

    Returns:
        Joined table; unmatched right fields are missing

    Raises:
        ValueError: If the key is absent, right has duplicate keys, or names collide
    """
    if key not in left.schema or key not in right.schema:
        raise ValueError(f"key column {key!r} must exist in both tables")

    right_keys = right.column(key).values
    index: Dict[Any, int] = {}
    for position, value in enumerate(right_keys):
        if value is None:
            continue
        if value in index:
            raise ValueError(f"duplicate key {value!r} in right table")
        index[value] = position

    appended = [(n, k) for n, k in right.schema.columns if n != key]
    collisions = [n for n, _ in appended if n in left.schema]
    if collisions:
        raise ValueError(f"column names present in both tables: {collisions}")

    left_keys = left.column(key).values
    match = np.fromiter((index.get(v, -1) for v in left_keys), dtype=np.int64, count=left.n_rows)
    matched = match >= 0

    columns = dict(left.columns)
    for name, kind in appended:
        source = right.column(name)
        if kind in TEXT_KINDS:
            values = np.empty(left.n_rows, dtype=object)
            values[matched] = source.values[match[matched]]
            columns[name] = Column.text(list(values))
        else:
            values = np.full(left.n_rows, np.nan)
            values[matched] = source.values[match[matched]]
            columns[name] = Column.numeric(values)

    logger.info(f"Joined on {key}: {int(matched.sum())}/{left.n_rows} rows matched")
    return Table(Schema(left.schema.columns + tuple(appended)), columns)


def drop_columns(table: Table, names: Sequence[str]) -> Table:
    """Remove columns by name; row count is unchanged.

    Raises:
        ValueError: If a name is not in the schema
    """
    unknown = [n for n in names if n not in table.schema]
    if unknown:
        raise ValueError(f"unknown columns: {unknown}")
    schema = table.schema.without(names)
    return Table(schema, {n: table.columns[n] for n in schema.names})
