"""
Training configuration and the reference experiment presets.

Configs are read from JSON or YAML files shaped like ``TrainConfig.model_dump()``; see
docs/CONFIGURATION.md.
"""

import json
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from isoflow.errors import ConfigError, DataFormatError, validation_messages
from isoflow.flows.config import ConvNetConfig, FixedFilterNetConfig, FlowConfig


class TrainConfig(BaseModel):
    """Optimization settings for the weight-decayed normalizing-flow loss."""

    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(ge=1, description="Number of passes over the data")
    batch_size: int = Field(ge=1, description="Mini-batch size (last partial batch is kept)")
    learning_rate: float = Field(default=1e-3, gt=0.0, description="Adam step size")
    betas: tuple[float, float] = Field(default=(0.9, 0.99), description="Adam (β₁, β₂)")
    eps: float = Field(default=1e-8, gt=0.0, description="Adam ε")
    weight_decay: float = Field(default=0.0, ge=0.0, description="λ in (λ/2)‖θ‖²")
    seed: int = Field(default=0, description="Initialization and shuffling seed")
    dataset: str | None = Field(default=None, description="Dataset reference (name or path)")
    flow: FlowConfig = Field(description="Flow architecture")

    @field_validator("betas")
    @classmethod
    def _betas_in_range(cls, value: tuple[float, float]) -> tuple[float, float]:
        if not all(0.0 <= b < 1.0 for b in value):
            raise ValueError("betas must lie in [0, 1)")
        return value

    @classmethod
    def parse(cls, data: dict[str, Any]) -> "TrainConfig":
        """
        Validate a raw mapping.

        Raises:
            ConfigError: If validation fails
        """
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError("invalid training config", details=validation_messages(e)) from e


def load_train_config(path: str | Path) -> TrainConfig:
    """
    Read a training config from a JSON or YAML file.

    Args:
        path: ``.json``, ``.yaml`` or ``.yml`` file

    Returns:
        TrainConfig
    """
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"config file not found: {path}", path=str(path))
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in {".yaml", ".yml"}:
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse config {path}: {e}", path=str(path)) from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain an object", path=str(path))
    return TrainConfig.parse(data)


def _vector_flow(dim: int, blocks: int, reflections: int) -> FlowConfig:
    return FlowConfig(
        data_kind="vector",
        dim=dim,
        blocks=blocks,
        activation_order=2,
        coupling=FixedFilterNetConfig(taps=[1.0, 0.0, 1.0]),
        householder_reflections=reflections,
    )


def preset(name: str, seed: int = 0) -> TrainConfig:
    """
    Reference training configurations.

    Args:
        name: ``double_gaussian``, ``hemisphere``, ``mnist`` or ``mnist_reduced``
        seed: Seed stored in the config

    Returns:
        TrainConfig
    """
    if name == "double_gaussian":
        return TrainConfig(
            epochs=500, batch_size=16, weight_decay=0.2, seed=seed, dataset="double_gaussian",
            flow=_vector_flow(dim=2, blocks=2, reflections=2),
        )
    if name == "hemisphere":
        return TrainConfig(
            epochs=500, batch_size=16, weight_decay=0.02, seed=seed, dataset="hemisphere",
            flow=_vector_flow(dim=3, blocks=3, reflections=3),
        )
    if name in {"mnist", "mnist_reduced"}:
        full = name == "mnist"
        return TrainConfig(
            epochs=100 if full else 5,
            batch_size=128 if full else 32,
            weight_decay=0.0,
            seed=seed,
            dataset="mnist",
            flow=FlowConfig(
                data_kind="image",
                image_shape=(1, 28, 28),
                blocks=6 if full else 2,
                activation_order=6,
                coupling=ConvNetConfig(channels=[128, 128] if full else [16, 16], kernel_size=5),
                linear_kernel_size=5,
            ),
        )
    raise ConfigError(
        f"unknown preset '{name}'",
        available=["double_gaussian", "hemisphere", "mnist", "mnist_reduced"],
    )
