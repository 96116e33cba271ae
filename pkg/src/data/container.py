"""Columnar binary container for prepared datasets.

Layout: 6-byte magic, uint16 version, uint32 header length, UTF-8 JSON header,
then one little-endian float64 block per column in header order.
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.data.schema import ColumnKind, Schema
from src.data.table import TEXT_KINDS, Column, Table
from src.utils.errors import ModelFormatError
from src.utils.logger import app_logger as logger

MAGIC = b"FRXCOL"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<6sHI")


def write_container(table: Table, path: Path, metadata: Optional[Dict[str, Any]] = None) -> Path:
    """Persist an all-numeric table.

    Args:
        table: Encoded table (no text columns, no missing values)
        path: Destination file
        metadata: Extra JSON-serialisable header entries

    Returns:
        The written path

    Raises:
        ValueError: If the table still has text columns or missing cells
    """
    path = Path(path)
    descriptors = []
    blocks = []
    offset = 0
    for name, kind in table.schema.columns:
        if kind in TEXT_KINDS:
            raise ValueError(f"column {name} is {kind.value}; only numeric tables can be stored")
        column = table.columns[name]
        if column.missing.any():
            raise ValueError(f"column {name} has missing values")
        block = np.ascontiguousarray(column.values, dtype="<f8").tobytes()
        descriptors.append({"name": name, "kind": kind.value, "offset": offset, "nbytes": len(block)})
        blocks.append(block)
        offset += len(block)

    header = {
        "format_version": FORMAT_VERSION,
        "n_rows": table.n_rows,
        "columns": descriptors,
        "metadata": metadata or {},
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        handle.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)))
        handle.write(header_bytes)
        for block in blocks:
            handle.write(block)

    logger.info(f"Wrote {table.n_rows} rows x {len(descriptors)} columns to {path}")
    return path


def read_container(path: Path) -> Tuple[Table, Dict[str, Any]]:
    """Load a container written by :func:`write_container`.

    Returns:
        (table, metadata)

    Raises:
        FileNotFoundError: If the file does not exist
        ModelFormatError: If the magic, version or layout is wrong
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Prepared dataset not found: {path}")
    raw = path.read_bytes()
    if len(raw) < _PREFIX.size:
        raise ModelFormatError(f"{path.name}: truncated container")
    magic, version, header_len = _PREFIX.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ModelFormatError(f"{path.name}: not a prepared dataset (bad magic)")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{path.name}: unsupported container version {version}")

    start = _PREFIX.size
    try:
        header = json.loads(raw[start:start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"{path.name}: corrupt header: {e}") from e

    data_start = start + header_len
    n_rows = int(header["n_rows"])
    columns: Dict[str, Column] = {}
    schema_columns = []
    for desc in header["columns"]:
        begin = data_start + int(desc["offset"])
        end = begin + int(desc["nbytes"])
        if end > len(raw) or int(desc["nbytes"]) != 8 * n_rows:
            raise ModelFormatError(f"{path.name}: column {desc['name']} block is truncated")
        values = np.frombuffer(raw[begin:end], dtype="<f8").astype(np.float64)
        columns[desc["name"]] = Column.numeric(values)
        schema_columns.append((desc["name"], ColumnKind(desc["kind"])))

    return Table(Schema(tuple(schema_columns)), columns), header.get("metadata", {})
