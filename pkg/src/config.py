"""Configuration management for the fraud detection pipeline."""

import os
from pathlib import Path
from typing import List

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="FRAUDX_",
        case_sensitive=False,
        extra="ignore",
    )

    # Reproducibility and parallelism
    seed: int = Field(default=42, ge=0, description="Default random seed when the run config omits one")
    jobs: int = Field(default=0, ge=0, le=256, description="Worker threads (0 = machine parallelism)")

    # Paths
    output_dir: Path = Field(default=Path("./artifacts"), description="Default artifact directory")
    data_dir: Path = Field(default=Path("./data"), description="Default directory for datasets")

    # Data loading
    na_tokens: List[str] = Field(default=["", "NaN", "NA"], description="Cell values treated as missing")

    # Explainability budgets
    shap_max_rows: int = Field(default=2000, ge=1, description="Rows used when summarising SHAP values")
    lime_samples: int = Field(default=5000, ge=10, description="Perturbations per LIME explanation")
    lime_kernel_scale: float = Field(default=0.75, gt=0.0, description="LIME kernel width per sqrt(feature count)")
    pdp_grid: int = Field(default=20, ge=2, le=200, description="Grid points per partial dependence curve")
    pfi_repeats: int = Field(default=5, ge=1, le=100, description="Shuffles per feature for permutation importance")

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Path = Field(default=Path("./logs/fraudx.log"), description="Log file path")

    def __init__(self, **kwargs):
        """Initialize settings and create necessary directories."""
        super().__init__(**kwargs)
        self.log_file.parent.mkdir(parents=True, exist_ok=True)

    @property
    def effective_jobs(self) -> int:
        """Resolve the worker count, mapping 0 to the machine's CPU count."""
        return self.jobs or (os.cpu_count() or 1)


# Global settings instance
settings = Settings()
