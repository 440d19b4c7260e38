"""
Flow architecture configuration.

A flow is a composition of L blocks. Vector blocks are actnorm → Householder reflections →
additive coupling; image blocks are actnorm → two masked invertible convolutions → additive
coupling with a convolutional net.
"""

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from isoflow.errors import ConfigError, validation_messages


class FixedFilterNetConfig(BaseModel):
    """Fixed 1D filter (zero-padded) followed by a learnable tanh-poly activation per entry."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["fixed_filter"] = "fixed_filter"
    taps: list[float] = Field(default=[1.0, 0.0, 1.0], description="Odd-length filter taps")

    @model_validator(mode="after")
    def _odd_taps(self) -> "FixedFilterNetConfig":
        if len(self.taps) % 2 != 1:
            raise ValueError("filter must have odd length")
        return self


class FeedForwardNetConfig(BaseModel):
    """Fully connected net with tanh-poly activations after every hidden layer."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["feedforward"] = "feedforward"
    widths: list[Annotated[int, Field(ge=1)]] = Field(
        default=[16, 16], description="Hidden layer widths"
    )


class ConvNetConfig(BaseModel):
    """Same-padded 2D conv net with per-channel tanh-poly activations."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["conv"] = "conv"
    channels: list[Annotated[int, Field(ge=1)]] = Field(
        default=[16, 16], description="Hidden channel counts"
    )
    kernel_size: int = Field(default=5, ge=1, description="Odd kernel size κ")

    @model_validator(mode="after")
    def _odd_kernel(self) -> "ConvNetConfig":
        if self.kernel_size % 2 != 1:
            raise ValueError("kernel_size must be odd")
        return self

    @property
    def padding(self) -> int:
        return (self.kernel_size - 1) // 2


CouplingNetConfig = Annotated[
    Union[FixedFilterNetConfig, FeedForwardNetConfig, ConvNetConfig],
    Field(discriminator="kind"),
]


class FlowConfig(BaseModel):
    """Architecture of a constant-determinant flow."""

    model_config = ConfigDict(extra="forbid")

    data_kind: Literal["vector", "image"] = Field(description="Vector R^d or image c×h×w data")
    dim: int | None = Field(default=None, ge=1, description="Vector dimension d")
    image_shape: tuple[int, int, int] | None = Field(
        default=None, description="Image shape (c, h, w)"
    )
    blocks: int = Field(ge=1, description="Number of blocks L")
    activation_order: int = Field(default=1, ge=1, description="Tanh-poly order N")
    coupling: CouplingNetConfig = Field(description="Coupling net used in every block")
    householder_reflections: int = Field(
        default=2, ge=0, description="Reflections per vector block"
    )
    linear_kernel_size: int = Field(
        default=5, ge=1, description="Kernel size of the invertible image convolutions"
    )
    actnorm_init: Literal["data", "identity"] = Field(
        default="data", description="Data-dependent actnorm init or plain s=1, b=0"
    )
    init_scale: float = Field(
        default=0.01, gt=0.0, description="Scale of the random coupling-net initialization"
    )

    @model_validator(mode="after")
    def _consistent(self) -> "FlowConfig":
        if self.data_kind == "vector":
            if self.dim is None:
                raise ValueError("vector flows need dim")
            if self.coupling.kind == "conv":
                raise ValueError("vector flows need a fixed_filter or feedforward coupling net")
        else:
            if self.image_shape is None:
                raise ValueError("image flows need image_shape")
            if any(s < 1 for s in self.image_shape):
                raise ValueError("image_shape entries must be positive")
            if self.coupling.kind != "conv":
                raise ValueError("image flows need a conv coupling net")
            if self.linear_kernel_size % 2 != 1:
                raise ValueError("linear_kernel_size must be odd")
        return self

    @property
    def ambient_dim(self) -> int:
        """Flattened dimension d (c·h·w for images)."""
        if self.data_kind == "vector":
            assert self.dim is not None
            return self.dim
        assert self.image_shape is not None
        c, h, w = self.image_shape
        return c * h * w

    @classmethod
    def parse(cls, data: dict) -> "FlowConfig":
        """
        Validate a raw mapping.

        Args:
            data: Parsed JSON/YAML object

        Returns:
            FlowConfig

        Raises:
            ConfigError: If validation fails
        """
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError("invalid flow config", details=validation_messages(e)) from e
