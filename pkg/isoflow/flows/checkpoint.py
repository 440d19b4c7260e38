"""
JSON checkpoints for flow models.

Format::

    {"format_version": 1, "config": {...}, "params": {"<block name>": [f64, ...]},
     "actnorm_initialized": true, "seed": 0}

Floats are written with Python's shortest round-trip repr, so values reload bit-exactly.
"""

import json
from pathlib import Path
from typing import Any

from isoflow.errors import ConfigError, DataFormatError
from isoflow.flows.config import FlowConfig
from isoflow.flows.layers import ActNorm
from isoflow.flows.model import FlowModel, allocate_params, build_layers
from isoflow.utils.logging import get_logger

logger = get_logger(__name__)

FORMAT_VERSION = 1


def checkpoint_dict(model: FlowModel) -> dict[str, Any]:
    """Serializable checkpoint payload for a model."""
    return {
        "format_version": FORMAT_VERSION,
        "config": model.config.model_dump(mode="json"),
        "params": model.params.to_dict(),
        "actnorm_initialized": model.actnorm_initialized,
        "seed": model.seed,
    }


def save_checkpoint(model: FlowModel, path: str | Path) -> Path:
    """
    Write a model checkpoint.

    Args:
        model: Flow model
        path: Destination JSON file (parent directories are created)

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(checkpoint_dict(model), f)
    logger.info("checkpoint_saved", path=str(path), params=len(model.params))
    return path


def model_from_dict(payload: dict[str, Any]) -> FlowModel:
    """
    Rebuild a model from a checkpoint payload.

    Args:
        payload: Parsed checkpoint JSON

    Returns:
        FlowModel with the stored parameters

    Raises:
        DataFormatError: If the payload is malformed or has an unsupported version
    """
    if not isinstance(payload, dict):
        raise DataFormatError("checkpoint must be a JSON object")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise DataFormatError(
            f"unsupported checkpoint format_version {version!r}", expected=FORMAT_VERSION
        )
    for key in ("config", "params", "actnorm_initialized", "seed"):
        if key not in payload:
            raise DataFormatError(f"checkpoint is missing '{key}'")

    try:
        cfg = FlowConfig.parse(payload["config"])
    except ConfigError as e:
        raise DataFormatError("checkpoint config is invalid", **e.context) from e

    layers = build_layers(cfg)
    params = allocate_params(layers)
    params.load_dict(payload["params"])
    initialized = bool(payload["actnorm_initialized"])
    for layer in layers:
        if isinstance(layer, ActNorm):
            layer.initialized = initialized
    return FlowModel(cfg, layers, params, int(payload["seed"]))


def load_checkpoint(path: str | Path) -> FlowModel:
    """
    Load a model checkpoint.

    Args:
        path: JSON checkpoint file

    Returns:
        FlowModel
    """
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"checkpoint not found: {path}", path=str(path))
    try:
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"checkpoint is not valid JSON: {e}", path=str(path)) from e
    model = model_from_dict(payload)
    logger.info("checkpoint_loaded", path=str(path), params=len(model.params))
    return model
