"""Run configuration: the YAML document that drives every pipeline command."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.gbdt.config import GBDTConfig, base_configs, meta_config
from src.utils.errors import SchemaError

THRESHOLD_POLICIES = ("f1_optimal", "fixed:<value>")
TUNING_TARGETS = ("base1", "base2", "base3", "meta")


class SmoteSettings(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    enabled: bool = True
    k_neighbors: int = Field(default=5, ge=1)
    target_ratio: float = Field(default=1.0, gt=0.0, le=1.0)
    scaled: bool = False
    before_selection: bool = Field(default=False, description="Balance before SHAP feature selection")


class TuningSettings(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    enabled: bool = True
    trials: int = Field(default=20, ge=1)
    strategy: str = Field(default="adaptive", pattern="^(random|adaptive)$")
    target: str = Field(default="base1", pattern="^(base1|base2|base3|meta)$")
    folds: int = Field(default=3, ge=2, description="Folds for the cross-validated AUC objective")


class BaselineSettings(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    enabled: bool = True
    smote: bool = Field(default=True, description="Train baselines on SMOTE-balanced data")
    logreg_l2: float = Field(default=1.0, ge=0.0)
    logreg_max_iters: int = Field(default=500, ge=0)
    logreg_tol: float = Field(default=1e-6, gt=0.0)
    tree_max_depth: int = Field(default=6, ge=0, le=32)


class RunConfig(BaseModel):
    """Validated run configuration; relative paths resolve against the config file's directory."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    transaction_path: Path
    identity_path: Optional[Path] = None
    schema_path: Path
    seed: int = Field(ge=0)
    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    smote: SmoteSettings = SmoteSettings()
    feature_k: int = Field(default=30, ge=1)
    folds: int = Field(default=5, ge=2)
    tuning: TuningSettings = TuningSettings()
    base_configs: List[GBDTConfig] = Field(default_factory=lambda: list(base_configs()))
    meta_config: GBDTConfig = Field(default_factory=meta_config)
    threshold: str = "f1_optimal"
    output_dir: Path = Path("./artifacts")
    smote_before_split: bool = Field(default=False, description="Apply SMOTE before the train/test split")
    naive_stacking: bool = Field(default=False, description="In-sample meta-features (leaks labels)")
    baselines: BaselineSettings = BaselineSettings()
    distribution_features: List[str] = Field(default_factory=lambda: ["TransactionAmt", "card1", "addr1"])

    @field_validator("base_configs")
    @classmethod
    def _three_bases(cls, value: List[GBDTConfig]) -> List[GBDTConfig]:
        if len(value) != 3:
            raise ValueError(f"exactly 3 base configs are required, got {len(value)}")
        return value

    @field_validator("threshold")
    @classmethod
    def _threshold_policy(cls, value: str) -> str:
        parse_threshold(value)
        return value

    @property
    def threshold_policy(self) -> Union[str, float]:
        return parse_threshold(self.threshold)

    @classmethod
    def from_yaml(cls, path: Path, overrides: Optional[Dict[str, Any]] = None,
                  default_seed: Optional[int] = None) -> "RunConfig":
        """Load, apply overrides (dotted keys such as ``smote.k_neighbors``) and validate.

        ``default_seed`` fills ``seed`` only when neither the file nor the overrides set it.

        Raises:
            FileNotFoundError: If the file does not exist
            SchemaError: If the document is malformed or fails validation
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Run configuration not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as e:
            raise SchemaError(f"invalid run configuration {path}: {e}") from e
        if not isinstance(raw, dict):
            raise SchemaError(f"run configuration {path} must be a mapping")

        for dotted, value in (overrides or {}).items():
            if value is None:
                continue
            target = raw
            *parents, leaf = dotted.split(".")
            for key in parents:
                target = target.setdefault(key, {})
            target[leaf] = value
        if raw.get("seed") is None and default_seed is not None:
            raw["seed"] = default_seed

        base = path.parent
        for key in ("transaction_path", "identity_path", "schema_path", "output_dir"):
            if raw.get(key) is not None and not Path(raw[key]).is_absolute():
                raw[key] = str(base / raw[key])
        try:
            return cls(**raw)
        except ValidationError as e:
            raise SchemaError(f"invalid run configuration {path}: {e}") from e


def parse_threshold(value: str) -> Union[str, float]:
    """``f1_optimal`` or ``fixed:<v>`` with v in (0, 1)."""
    if value == "f1_optimal":
        return value
    if value.startswith("fixed:"):
        try:
            fixed = float(value.split(":", 1)[1])
        except ValueError:
            fixed = float("nan")
        if 0.0 < fixed < 1.0:
            return fixed
    raise ValueError(f"threshold must be one of {THRESHOLD_POLICIES} with 0 < value < 1, got {value!r}")
