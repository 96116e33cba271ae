"""Versioned JSON documents for boosted tree models.

Finite floats are written with 17 significant digits, which read back to the
identical double, so reloaded models predict bit-for-bit the same margins.
"""

import json
import math
import re
from pathlib import Path
from typing import Any, Dict, Mapping

from pydantic import ValidationError

from src.gbdt.config import GBDTConfig, Growth
from src.gbdt.model import GBDTModel
from src.gbdt.tree import TreeNode
from src.utils.errors import ModelFormatError

FORMAT_VERSION = 1
KIND = "gbdt"

_FLOAT_MARK = "\x00float:"
_FLOAT_PATTERN = re.compile(r'"\\u0000float:([^"]+)"')


def node_to_dict(node: TreeNode) -> Dict[str, Any]:
    if node.is_leaf:
        return {"value": node.value, "cover": node.cover}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "cover": node.cover,
        "left": node_to_dict(node.left),
        "right": node_to_dict(node.right),
    }


def node_from_dict(doc: Mapping[str, Any]) -> TreeNode:
    """Rebuild a node; the stored cover is kept as written and must be positive."""
    if not isinstance(doc, Mapping) or "cover" not in doc:
        raise ModelFormatError(f"tree node must be an object with a cover, got {doc!r:.80}")
    cover = float(doc["cover"])
    if not (math.isfinite(cover) and cover > 0):
        raise ModelFormatError(f"node cover must be positive and finite, got {cover}")
    if "value" in doc:
        return TreeNode(cover=cover, value=float(doc["value"]))
    missing = [key for key in ("feature", "threshold", "left", "right") if key not in doc]
    if missing:
        raise ModelFormatError(f"internal node is missing {missing}")
    return TreeNode(
        cover=cover,
        feature=int(doc["feature"]),
        threshold=float(doc["threshold"]),
        left=node_from_dict(doc["left"]),
        right=node_from_dict(doc["right"]),
    )


def model_to_dict(model: GBDTModel) -> Dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "kind": KIND,
        "base_score": model.base_score,
        "growth": model.growth.value,
        "feature_names": list(model.feature_names),
        "config": model.config.to_document(),
        "trees": [node_to_dict(tree) for tree in model.trees],
    }


def check_header(doc: Any, kind: str) -> None:
    """Validate the version and kind tags shared by every model document."""
    if not isinstance(doc, Mapping):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    if doc.get("kind", kind) != kind:
        raise ModelFormatError(f"expected a {kind!r} document, got {doc.get('kind')!r}")


def model_from_dict(doc: Mapping[str, Any]) -> GBDTModel:
    """Rebuild a GBDTModel from its document.

    Raises:
        ModelFormatError: On a version mismatch or malformed structure
    """
    check_header(doc, KIND)
    missing = [key for key in ("base_score", "feature_names", "trees") if key not in doc]
    if missing:
        raise ModelFormatError(f"model document is missing {missing}")
    try:
        config_doc = dict(doc.get("config") or {})
        if "growth" in doc:
            config_doc.setdefault("growth", doc["growth"])
        config = GBDTConfig.model_validate(config_doc)
        if "growth" in doc and config.growth != Growth(doc["growth"]):
            raise ModelFormatError(f"growth {doc['growth']!r} disagrees with config {config.growth.value!r}")
    except (ValidationError, ValueError) as e:
        if isinstance(e, ModelFormatError):
            raise
        raise ModelFormatError(f"invalid model config: {e}") from e

    trees = tuple(node_from_dict(tree) for tree in doc["trees"])
    names = tuple(str(name) for name in doc["feature_names"])
    for tree in trees:
        _check_features(tree, len(names))
    return GBDTModel(trees, float(doc["base_score"]), config, names)


def _check_features(node: TreeNode, n_features: int) -> None:
    if node.is_leaf:
        return
    if not 0 <= node.feature < n_features:
        raise ModelFormatError(f"split feature {node.feature} outside 0..{n_features - 1}")
    _check_features(node.left, n_features)
    _check_features(node.right, n_features)


def _format_float(value: float) -> str:
    text = format(value, ".17g")
    return text if ("." in text or "e" in text) else text + ".0"


def _mark_floats(obj: Any) -> Any:
    if isinstance(obj, float) and math.isfinite(obj):
        return _FLOAT_MARK + _format_float(obj)
    if isinstance(obj, Mapping):
        return {key: _mark_floats(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_mark_floats(value) for value in obj]
    return obj


def dumps(doc: Mapping[str, Any]) -> str:
    """Indented JSON with every finite float written to 17 significant digits."""
    text = json.dumps(_mark_floats(doc), indent=2)
    return _FLOAT_PATTERN.sub(r"\1", text) + "\n"


def save_model(model: GBDTModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(model_to_dict(model)), encoding="utf-8")
    return path


def read_document(path: Path) -> Dict[str, Any]:
    """Parse a JSON model document.

    Raises:
        FileNotFoundError: If the file does not exist
        ModelFormatError: If it is not valid JSON
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{path.name} is not valid JSON: {e}") from e


def load_model(path: Path) -> GBDTModel:
    return model_from_dict(read_document(path))
