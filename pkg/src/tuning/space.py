"""Search spaces over GBDTConfig parameters."""

import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Tuple, Union

import numpy as np


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"IntRange needs lo < hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.lo, self.hi + 1))

    def contains(self, value: Any) -> bool:
        return isinstance(value, (int, np.integer)) and self.lo <= value <= self.hi

    def to_unit(self, value: float) -> float:
        return (value - self.lo) / (self.hi - self.lo)

    def from_unit(self, u: float) -> int:
        return int(min(self.hi, max(self.lo, round(self.lo + u * (self.hi - self.lo)))))


@dataclass(frozen=True)
class FloatRange:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"FloatRange needs lo < hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.lo, self.hi))

    def contains(self, value: Any) -> bool:
        return isinstance(value, (int, float)) and self.lo <= value <= self.hi

    def to_unit(self, value: float) -> float:
        return (value - self.lo) / (self.hi - self.lo)

    def from_unit(self, u: float) -> float:
        return float(min(self.hi, max(self.lo, self.lo + u * (self.hi - self.lo))))


@dataclass(frozen=True)
class LogFloatRange:
    """Uniform in log space; both bounds must be positive."""

    lo: float
    hi: float

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ValueError(f"LogFloatRange needs 0 < lo < hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng: np.random.Generator) -> float:
        return self.from_unit(float(rng.random()))

    def contains(self, value: Any) -> bool:
        return isinstance(value, (int, float)) and self.lo <= value <= self.hi

    def to_unit(self, value: float) -> float:
        return (math.log(value) - math.log(self.lo)) / (math.log(self.hi) - math.log(self.lo))

    def from_unit(self, u: float) -> float:
        log_value = math.log(self.lo) + u * (math.log(self.hi) - math.log(self.lo))
        return float(min(self.hi, max(self.lo, math.exp(log_value))))


@dataclass(frozen=True)
class Choice:
    options: Tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, "options", tuple(self.options))
        if not self.options:
            raise ValueError("Choice needs at least one option")

    def sample(self, rng: np.random.Generator) -> Any:
        return self.options[int(rng.integers(0, len(self.options)))]

    def contains(self, value: Any) -> bool:
        return value in self.options


Param = Union[IntRange, FloatRange, LogFloatRange, Choice]
SearchSpace = Dict[str, Param]


def sample_params(space: Mapping[str, Param], rng: np.random.Generator) -> Dict[str, Any]:
    """One draw per parameter, in the space's key order."""
    return {name: param.sample(rng) for name, param in space.items()}


def in_space(space: Mapping[str, Param], params: Mapping[str, Any]) -> bool:
    return set(space) == set(params) and all(space[name].contains(params[name]) for name in space)


def default_space() -> SearchSpace:
    """Ranges for the six boosting parameters that are tuned."""
    return {
        "n_estimators": IntRange(100, 600),
        "max_depth": IntRange(3, 10),
        "learning_rate": LogFloatRange(0.01, 0.3),
        "subsample": FloatRange(0.5, 1.0),
        "colsample_bytree": FloatRange(0.5, 1.0),
        "scale_pos_weight": FloatRange(1.0, 30.0),
    }
