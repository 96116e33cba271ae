"""Pytest configuration and shared fixtures."""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from src.gbdt.config import GBDTConfig
from src.gbdt.model import GBDTModel
from src.gbdt.tree import TreeNode


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale pipeline runs on the 10k-row synthetic dataset")


@pytest.fixture(scope="session")
def temp_dir():
    """Create a temporary directory for tests."""
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path
    shutil.rmtree(temp_path)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def xor_data():
    """Four XOR corners with unequal counts so the first split has positive gain."""
    corners = [
        ((1.0, 1.0), 0, 30),
        ((-1.0, -1.0), 0, 20),
        ((1.0, -1.0), 1, 25),
        ((-1.0, 1.0), 1, 25),
    ]
    X = np.vstack([np.tile(point, (count, 1)) for point, _, count in corners])
    y = np.concatenate([np.full(count, label) for _, label, count in corners]).astype(np.int64)
    return X, y


@pytest.fixture
def separable_1d():
    """y = 1 iff x > 10 on x = 0..19."""
    x = np.arange(20, dtype=np.float64)
    return x.reshape(-1, 1), (x > 10).astype(np.int64)


@pytest.fixture
def stump_model():
    """Depth-1 tree on f0 <= 5 with covers 3/1 and leaves -1/+2, no base score."""
    tree = TreeNode.split(0, 5.0, TreeNode.leaf(-1.0, 3.0), TreeNode.leaf(2.0, 1.0))
    return GBDTModel((tree,), 0.0, GBDTConfig(), ("f0", "f1"))


@pytest.fixture
def two_cluster_data():
    """Imbalanced two-cluster classification data, 600 rows and 4 features."""
    gen = np.random.default_rng(7)
    n_neg, n_pos = 540, 60
    X_neg = gen.normal(0.0, 1.0, (n_neg, 4))
    X_pos = gen.normal(0.0, 1.0, (n_pos, 4))
    X_pos[:, :2] += 2.5
    X = np.vstack([X_neg, X_pos])
    y = np.concatenate([np.zeros(n_neg), np.ones(n_pos)]).astype(np.int64)
    order = gen.permutation(len(y))
    return X[order], y[order]


@pytest.fixture
def raw_dataset(tmp_path):
    """Small transaction/identity CSV pair plus its schema document."""
    transaction = tmp_path / "transaction.csv"
    transaction.write_text(
        "TransactionID,isFraud,TransactionAmt,ProductCD,card1\n"
        "1,0,10.5,W,100\n"
        "2,1,,C,200\n"
        "3,0,30.0,W,NA\n"
        "4,1,45.0,,400\n"
    )
    identity = tmp_path / "identity.csv"
    identity.write_text(
        "TransactionID,DeviceType\n"
        "2,mobile\n"
        "4,desktop\n"
    )
    schema = tmp_path / "schema.yaml"
    schema.write_text(
        "key_column: TransactionID\n"
        "target_column: isFraud\n"
        "categorical: [ProductCD, DeviceType]\n"
    )
    return transaction, identity, schema
