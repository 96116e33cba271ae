"""Prepare stage: load, join, drop key, impute, encode, split, persist."""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from src.data.container import write_container
from src.data.loader import load_csv, read_header
from src.data.preprocess import EncodingMap, impute, label_encode
from src.data.schema import SchemaConfig
from src.data.split import stratified_split
from src.data.table import Table, drop_columns, left_join
from src.pipeline.artifacts import ArtifactLayout, write_json
from src.pipeline.run_config import RunConfig
from src.resample.smote import SmoteConfig, class_counts, smote
from src.utils.errors import SchemaError, stage
from src.utils.logger import app_logger as logger


@dataclass(frozen=True)
class PreparedData:
    train: Table
    test: Table
    encoding: EncodingMap
    layout: ArtifactLayout


def _load(path: Path, schema_cfg: SchemaConfig) -> Table:
    schema = schema_cfg.resolve(read_header(path))
    return load_csv(path, schema, schema_cfg.na_tokens)


def balance_table(table: Table, cfg: RunConfig, max_workers: Optional[int] = None) -> Table:
    """SMOTE over the whole encoded table (used when balancing precedes the split)."""
    features = table.feature_names
    X = table.to_matrix(features)
    y = table.labels()
    smote_cfg = SmoteConfig(k_neighbors=cfg.smote.k_neighbors, target_ratio=cfg.smote.target_ratio,
                            seed=cfg.seed, scaled=cfg.smote.scaled)
    X_bal, y_bal = smote(X, y, smote_cfg, max_workers=max_workers)
    data = {name: X_bal[:, j] for j, name in enumerate(features)}
    data[table.schema.target] = y_bal.astype(np.float64)
    return Table.from_arrays(table.schema, data)


def run_prepare(cfg: RunConfig, max_workers: Optional[int] = None) -> PreparedData:
    """Turn the raw CSVs into train/test containers plus the encoding document.

    Raises:
        StageError: Tagged ``prepare:<step>`` on any failure
    """
    layout = ArtifactLayout(cfg.output_dir)

    with stage("prepare:schema"):
        schema_cfg = SchemaConfig.from_yaml(cfg.schema_path)
        if not schema_cfg.key_column or not schema_cfg.target_column:
            raise SchemaError("schema must declare key_column and target_column")

    with stage("prepare:load"):
        table = _load(cfg.transaction_path, schema_cfg)
        identity = None
        if cfg.identity_path is None:
            logger.warning("No identity file configured; continuing with transaction columns only")
        elif not Path(cfg.identity_path).exists():
            logger.warning(f"Identity file {cfg.identity_path} not found; continuing with transaction columns only")
        else:
            identity = _load(cfg.identity_path, schema_cfg)

    with stage("prepare:join"):
        if identity is not None:
            table = left_join(table, identity, schema_cfg.key_column)
        absent = [c for c in schema_cfg.categorical if c not in table.schema]
        if absent:
            logger.warning(f"Declared categorical columns not present in the data: {absent}")
        if table.schema.target is None:
            raise SchemaError(f"target column {schema_cfg.target_column!r} not found in the transaction file")

    with stage("prepare:drop_key"):
        if table.schema.key is not None:
            table = drop_columns(table, [table.schema.key])

    with stage("prepare:impute"):
        table = impute(table, max_workers=max_workers)

    with stage("prepare:encode"):
        table, encoding = label_encode(table)
        counts = class_counts(table.labels())
        logger.info(f"Class counts: {counts}")

    if cfg.smote_before_split and cfg.smote.enabled:
        with stage("prepare:smote"):
            logger.warning("Balancing before the split: synthetic rows will reach the test set")
            table = balance_table(table, cfg, max_workers)

    with stage("prepare:split"):
        train, test = stratified_split(table, cfg.test_fraction, cfg.seed)

    with stage("prepare:write"):
        metadata = {
            "seed": cfg.seed,
            "test_fraction": cfg.test_fraction,
            "pre_balanced": bool(cfg.smote_before_split and cfg.smote.enabled),
            "encoded_columns": list(encoding.mappings),
        }
        write_container(train, layout.train_data, {**metadata, "part": "train"})
        write_container(test, layout.test_data, {**metadata, "part": "test"})
        write_json(encoding.to_dict(), layout.encoding)

    logger.info(f"Prepared {train.n_rows} train and {test.n_rows} test rows in {layout.prepared_dir}")
    return PreparedData(train, test, encoding, layout)
