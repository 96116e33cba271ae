"""Exception types and the stage-tagging helper used by the pipeline."""

from contextlib import contextmanager
from typing import Iterator, List, Optional, Sequence

from src.utils.logger import app_logger as logger


class SchemaError(ValueError):
    """Schema document is invalid or does not match a file header."""


class CsvFormatError(ValueError):
    """A CSV row is structurally malformed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        """Initialize the error.

        Args:
            message: Human readable description
            line_number: 1-based physical line of the offending row
        """
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ModelFormatError(ValueError):
    """A persisted model document has the wrong version, kind or structure."""


class FeatureMismatchError(ValueError):
    """Data columns do not match the features a model was trained on."""

    def __init__(self, expected: Sequence[str], found: Sequence[str]):
        """Initialize the error with an explicit diff.

        Args:
            expected: Feature names the model requires
            found: Feature names present in the data
        """
        found_set = set(found)
        expected_set = set(expected)
        self.missing: List[str] = [name for name in expected if name not in found_set]
        self.unexpected: List[str] = [name for name in found if name not in expected_set]
        super().__init__(
            f"feature mismatch: missing {self.missing or '[]'}, unexpected {self.unexpected or '[]'}"
        )


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for the CLI."""

    def __init__(self, stage_name: str, message: str):
        """Initialize the error.

        Args:
            stage_name: Stage tag such as ``prepare:join``
            message: Underlying failure description
        """
        super().__init__(f"[{stage_name}] {message}")
        self.stage = stage_name
        self.detail = message


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Tag any failure raised inside the block with a pipeline stage name.

    Args:
        name: Stage tag, e.g. ``train:stacking``

    Raises:
        StageError: Wrapping the original exception
    """
    with logger.contextualize(stage=name):
        try:
            yield
        except StageError:
            raise
        except Exception as e:
            logger.error(f"Stage {name} failed: {e}")
            raise StageError(name, str(e)) from e
