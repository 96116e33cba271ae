"""Column schema for tabular transaction data."""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.config import settings
from src.utils.errors import SchemaError
from src.utils.logger import app_logger as logger


class ColumnKind(str, Enum):
    """Role of a column in the table."""

    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    KEY = "key"
    TARGET = "target"


@dataclass(frozen=True)
class Schema:
    """Ordered list of (name, kind) column declarations."""

    columns: Tuple[Tuple[str, ColumnKind], ...]

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate column names: {duplicates}")
        kinds = [kind for _, kind in self.columns]
        if kinds.count(ColumnKind.KEY) > 1:
            raise SchemaError("at most one key column is allowed")
        if kinds.count(ColumnKind.TARGET) > 1:
            raise SchemaError("at most one target column is allowed")

    @classmethod
    def of(cls, columns: Iterable[Tuple[str, ColumnKind]]) -> "Schema":
        """Build a schema from (name, kind) pairs."""
        return cls(tuple((name, ColumnKind(kind)) for name, kind in columns))

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.columns]

    def kind(self, name: str) -> ColumnKind:
        for column, kind in self.columns:
            if column == name:
                return kind
        raise SchemaError(f"unknown column: {name}")

    def __contains__(self, name: object) -> bool:
        return any(column == name for column, _ in self.columns)

    def names_of(self, *kinds: ColumnKind) -> List[str]:
        return [name for name, kind in self.columns if kind in kinds]

    @property
    def key(self) -> Optional[str]:
        keys = self.names_of(ColumnKind.KEY)
        return keys[0] if keys else None

    @property
    def target(self) -> Optional[str]:
        targets = self.names_of(ColumnKind.TARGET)
        return targets[0] if targets else None

    @property
    def labeled(self) -> bool:
        return self.target is not None

    @property
    def feature_names(self) -> List[str]:
        """Numeric and categorical columns, in declaration order."""
        return self.names_of(ColumnKind.NUMERIC, ColumnKind.CATEGORICAL)

    def without(self, names: Sequence[str]) -> "Schema":
        dropped = set(names)
        return Schema(tuple(col for col in self.columns if col[0] not in dropped))

    def with_kind(self, name: str, kind: ColumnKind) -> "Schema":
        return Schema(tuple((n, kind if n == name else k) for n, k in self.columns))


class SchemaConfig(BaseModel):
    """Schema document as written in YAML.

    Only the roles are declared; the column order comes from each CSV header.
    """

    model_config = ConfigDict(extra="forbid")

    key_column: Optional[str] = Field(default=None, description="Join key, dropped before training")
    target_column: Optional[str] = Field(default=None, description="Binary label column")
    categorical: List[str] = Field(default_factory=list, description="Columns to label-encode")
    numeric: Optional[List[str]] = Field(default=None, description="Explicit numeric columns (strict mode)")
    na_tokens: List[str] = Field(default_factory=lambda: list(settings.na_tokens))

    @classmethod
    def from_yaml(cls, path: Path) -> "SchemaConfig":
        """Load a schema document.

        Args:
            path: YAML file with key_column, target_column, categorical, na_tokens

        Returns:
            Parsed SchemaConfig

        Raises:
            FileNotFoundError: If the document does not exist
            SchemaError: If the document is malformed
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Schema document not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
            return cls(**raw)
        except (yaml.YAMLError, ValidationError, TypeError) as e:
            raise SchemaError(f"invalid schema document {path}: {e}") from e

    def resolve(self, header: Sequence[str]) -> Schema:
        """Build the concrete schema for a file with the given header.

        Args:
            header: Column names in file order

        Returns:
            Schema in header order

        Raises:
            SchemaError: If strict numeric declarations disagree with the header
        """
        header_set = set(header)
        if self.numeric is not None:
            declared = set(self.numeric) | set(self.categorical)
            declared |= {c for c in (self.key_column, self.target_column) if c}
            undeclared = sorted(header_set - declared)
            if undeclared:
                raise SchemaError(f"header/schema mismatch: undeclared columns {undeclared}")

        absent = [c for c in self.categorical if c not in header_set]
        if absent:
            logger.debug(f"Declared categorical columns absent from this file: {absent}")

        categorical = set(self.categorical)
        columns = []
        for name in header:
            if name == self.key_column:
                kind = ColumnKind.KEY
            elif name == self.target_column:
                kind = ColumnKind.TARGET
            elif name in categorical:
                kind = ColumnKind.CATEGORICAL
            else:
                kind = ColumnKind.NUMERIC
            columns.append((name, kind))
        return Schema(tuple(columns))
