"""Bundled imbalanced synthetic dataset shaped like the transaction/identity pair."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from src.utils.logger import app_logger as logger

POSITIVE_RATE = 0.035
PRODUCT_CODES = ["W", "C", "R", "H", "S"]
EMAIL_DOMAINS = ["gmail.com", "yahoo.com", "hotmail.com", "anonymous.com", "outlook.com"]


@dataclass(frozen=True)
class SyntheticDataset:
    """Paths of a generated dataset."""

    transaction_path: Path
    identity_path: Path
    schema_path: Path
    n_rows: int
    n_positive: int


def _two_cluster_signal(rng: np.random.Generator, labels: np.ndarray, separation: float) -> np.ndarray:
    """Fraud sits in two opposite clusters around a central legitimate cloud.

    The classes share a mean, so the signal is invisible to a linear model.
    """
    n = len(labels)
    points = rng.normal(0.0, 1.0, size=(n, 2))
    fraud = np.flatnonzero(labels == 1)
    side = np.where(rng.random(len(fraud)) < 0.5, 1.0, -1.0)
    points[fraud] = side[:, None] * separation + rng.normal(0.0, 0.8, size=(len(fraud), 2))
    return points


def generate_synthetic(out_dir: Path, n_rows: int = 10_000, seed: int = 42,
                       n_noise: int = 6, missing_rate: float = 0.05) -> SyntheticDataset:
    """Write transaction.csv, identity.csv and schema.yaml into ``out_dir``.

    Args:
        out_dir: Destination directory
        n_rows: Number of transactions
        seed: Random seed
        n_noise: Number of pure-noise V columns
        missing_rate: Share of cells blanked in the sparse columns

    Returns:
        SyntheticDataset describing the written files
    """
    if n_rows < 100:
        raise ValueError("synthetic dataset needs at least 100 rows")
    rng = np.random.default_rng(seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    n_pos = int(round(n_rows * POSITIVE_RATE))
    labels = np.zeros(n_rows, dtype=np.int64)
    labels[rng.choice(n_rows, size=n_pos, replace=False)] = 1
    fraud = labels == 1

    clusters = _two_cluster_signal(rng, labels, separation=2.4)
    amount = np.round(np.exp(rng.normal(np.where(fraud, 3.9, 4.3), 0.9)), 2)

    product_weights_legit = np.array([0.70, 0.10, 0.08, 0.07, 0.05])
    product_weights_fraud = np.array([0.45, 0.35, 0.05, 0.07, 0.08])
    product = np.where(
        fraud,
        rng.choice(PRODUCT_CODES, size=n_rows, p=product_weights_fraud),
        rng.choice(PRODUCT_CODES, size=n_rows, p=product_weights_legit),
    )

    # Legitimate card1/addr1 values cluster on a few peaks; fraud is spread out.
    card_peaks = np.array([2800.0, 7900.0, 12500.0, 15800.0])
    card1 = np.where(
        fraud,
        rng.uniform(1000, 18000, n_rows),
        rng.choice(card_peaks, n_rows) + rng.normal(0, 250, n_rows),
    ).round()
    addr_peaks = np.array([204.0, 299.0, 325.0, 441.0])
    addr1 = np.where(
        fraud,
        rng.uniform(100, 540, n_rows),
        rng.choice(addr_peaks, n_rows) + rng.normal(0, 6, n_rows),
    ).round()

    c1 = rng.poisson(np.where(fraud, 3.0, 1.5))
    c14 = rng.poisson(np.where(fraud, 1.2, 1.8))
    d1 = np.round(rng.exponential(np.where(fraud, 20.0, 90.0)))
    email = rng.choice(EMAIL_DOMAINS, size=n_rows)

    transactions = pd.DataFrame({
        "TransactionID": np.arange(3_000_000, 3_000_000 + n_rows),
        "isFraud": labels,
        "TransactionAmt": amount,
        "ProductCD": product,
        "card1": card1,
        "addr1": addr1,
        "P_emaildomain": email,
        "C1": c1,
        "C14": c14,
        "D1": d1,
        "V12": np.round(clusters[:, 0], 6),
        "V13": np.round(clusters[:, 1], 6),
    })
    for j in range(n_noise):
        transactions[f"V{20 + j}"] = np.round(rng.normal(0.0, 1.0, n_rows), 6)

    for name in ("addr1", "D1", "P_emaildomain"):
        blank = rng.random(n_rows) < missing_rate
        transactions[name] = transactions[name].astype(object).where(~blank, None)

    # Identity rows exist for a subset of transactions, more often for fraud.
    has_identity = rng.random(n_rows) < np.where(fraud, 0.6, 0.25)
    ids = transactions["TransactionID"].to_numpy()[has_identity]
    identity_fraud = fraud[has_identity]
    identity = pd.DataFrame({
        "TransactionID": ids,
        "DeviceType": np.where(
            rng.random(len(ids)) < np.where(identity_fraud, 0.7, 0.35), "mobile", "desktop"
        ),
        "id_01": np.round(rng.normal(np.where(identity_fraud, -10.0, -5.0), 4.0)),
    })

    transaction_path = out_dir / "transaction.csv"
    identity_path = out_dir / "identity.csv"
    schema_path = out_dir / "schema.yaml"
    transactions.to_csv(transaction_path, index=False, na_rep="")
    identity.to_csv(identity_path, index=False, na_rep="")
    schema_path.write_text(yaml.safe_dump({
        "key_column": "TransactionID",
        "target_column": "isFraud",
        "categorical": ["ProductCD", "P_emaildomain", "DeviceType"],
        "na_tokens": ["", "NaN", "NA"],
    }, sort_keys=False), encoding="utf-8")

    logger.info(f"Synthetic dataset: {n_rows} rows, {n_pos} fraud ({n_pos / n_rows:.1%}) in {out_dir}")
    return SyntheticDataset(transaction_path, identity_path, schema_path, n_rows, n_pos)
