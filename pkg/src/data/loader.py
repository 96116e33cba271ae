"""Load CSV files (RFC 4180) into tables."""

import csv
import re
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from src.config import settings
from src.data.schema import Schema
from src.data.table import TEXT_KINDS, Column, Table
from src.utils.errors import CsvFormatError, SchemaError
from src.utils.logger import app_logger as logger

_LINE_PATTERN = re.compile(r"line (\d+)")


def load_csv(path: Path, schema: Schema, na_tokens: Optional[Sequence[str]] = None) -> Table:
    """Read a CSV file whose header matches the schema (in any order).

    Args:
        path: CSV file with a header row
        schema: Expected columns; the table keeps the schema's column order
        na_tokens: Cell values treated as missing (default: settings.na_tokens)

    Returns:
        Table with missing masks set for NA tokens and numeric parse failures

    Raises:
        FileNotFoundError: If the file does not exist
        SchemaError: If the header does not match the schema
        CsvFormatError: If a row has the wrong number of fields
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CSV file not found: {path}")
    na = set(settings.na_tokens if na_tokens is None else na_tokens)

    logger.info(f"Loading {path.name}...")
    check_field_counts(path)
    try:
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError as e:
        raise CsvFormatError(f"{path.name} is empty (no header row)") from e
    except pd.errors.ParserError as e:
        match = _LINE_PATTERN.search(str(e))
        line = int(match.group(1)) if match else None
        raise CsvFormatError(f"{path.name}: wrong field count ({e})", line_number=line) from e

    header = [str(h) for h in raw.iloc[0].tolist()]
    if len(set(header)) != len(header):
        raise SchemaError(f"{path.name}: duplicate header names")
    if set(header) != set(schema.names):
        raise SchemaError(
            f"{path.name}: header/schema mismatch: missing {sorted(set(schema.names) - set(header))}, "
            f"unexpected {sorted(set(header) - set(schema.names))}"
        )

    body = raw.iloc[1:].reset_index(drop=True)
    body.columns = header

    columns: Dict[str, Column] = {}
    for name, kind in schema.columns:
        cells = body[name]
        is_na = cells.isin(na).to_numpy()
        if kind in TEXT_KINDS:
            values = cells.to_numpy(dtype=object).copy()
            values[is_na] = None
            columns[name] = Column.text(list(values))
        else:
            numbers = pd.to_numeric(cells.where(~is_na), errors="coerce").to_numpy(dtype=np.float64)
            columns[name] = Column.numeric(numbers)

    table = Table(schema, columns)
    logger.info(f"Loaded {table.n_rows} rows x {len(schema.names)} columns from {path.name}")
    return table


def check_field_counts(path: Path) -> int:
    """Verify every record has as many fields as the header.

    Blank lines are skipped. A quoted cell may span several physical lines;
    errors report the physical line on which the offending record starts.

    Args:
        path: CSV file with a header row

    Returns:
        Number of fields in the header (0 for an empty file)

    Raises:
        CsvFormatError: On the first record with the wrong field count
    """
    path = Path(path)
    expected = 0
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        consumed = 0
        try:
            for record in reader:
                start, consumed = consumed + 1, reader.line_num
                if not record:
                    continue
                if not expected:
                    expected = len(record)
                elif len(record) != expected:
                    raise CsvFormatError(
                        f"{path.name}: expected {expected} fields, found {len(record)}",
                        line_number=start,
                    )
        except csv.Error as e:
            raise CsvFormatError(f"{path.name}: {e}", line_number=reader.line_num) from e
    return expected


def read_header(path: Path) -> list:
    """Return the header row of a CSV file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CSV file not found: {path}")
    try:
        head = pd.read_csv(path, header=None, nrows=1, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise CsvFormatError(f"{path.name} is empty (no header row)") from e
    return [str(h) for h in head.iloc[0].tolist()]
