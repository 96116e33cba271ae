"""Hyperparameters of the boosted tree trainer."""

from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field


class Growth(str, Enum):
    """Tree growth strategy."""

    DEPTH_WISE = "depth_wise"
    LEAF_WISE = "leaf_wise"
    SYMMETRIC = "symmetric"


class GBDTConfig(BaseModel):
    """Boosting configuration.

    ``reg_lambda`` is read from and written to documents as ``lambda``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True, use_enum_values=False)

    n_estimators: int = Field(default=300, ge=0, description="Exact number of trees")
    max_depth: int = Field(default=6, ge=0, le=32, description="Depth cap for every growth strategy")
    learning_rate: float = Field(default=0.1, gt=0.0, le=1.0)
    subsample: float = Field(default=0.8, gt=0.0, le=1.0, description="Row fraction per tree")
    colsample_bytree: float = Field(default=0.8, gt=0.0, le=1.0, description="Feature fraction per tree")
    scale_pos_weight: float = Field(default=1.0, ge=0.0, description="Weight multiplier for positive rows")
    growth: Growth = Growth.DEPTH_WISE
    max_leaves: int = Field(default=31, ge=2, description="Leaf cap (leaf_wise only)")
    reg_lambda: float = Field(default=1.0, ge=0.0, alias="lambda", description="L2 leaf regulariser")
    gamma: float = Field(default=0.0, ge=0.0, description="Minimum split gain")
    n_bins: int = Field(default=256, ge=2, le=65536)
    seed: int = 0

    def to_document(self) -> dict:
        """JSON-ready mapping using the document key names."""
        return self.model_dump(mode="json", by_alias=True)


def meta_config(seed: int = 0) -> GBDTConfig:
    """Shallow learner for the three stacked probabilities."""
    return GBDTConfig(
        n_estimators=50, max_depth=2, learning_rate=0.1, subsample=1.0,
        colsample_bytree=1.0, growth=Growth.DEPTH_WISE, seed=seed,
    )


def base_configs(seed: int = 0) -> Tuple[GBDTConfig, GBDTConfig, GBDTConfig]:
    """Default depth-wise, leaf-wise and symmetric base learner configs."""
    return (
        GBDTConfig(growth=Growth.DEPTH_WISE, seed=seed),
        GBDTConfig(growth=Growth.LEAF_WISE, seed=seed + 1),
        GBDTConfig(growth=Growth.SYMMETRIC, seed=seed + 2),
    )
