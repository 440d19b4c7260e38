"""
Diffeomorphism Registry: maps names to diffeomorphism factories.

The CLI selects the map with ``--diffeo``: a registered name (``modeled``, ``identity``) or
the path of a flow checkpoint.
"""

from pathlib import Path
from typing import Callable

from isoflow.diffeo.base import Diffeomorphism
from isoflow.diffeo.linear import Identity
from isoflow.diffeo.modeled import ModeledDoubleGaussian
from isoflow.errors import ConfigError
from isoflow.utils.logging import get_logger

logger = get_logger(__name__)

DiffeoFactory = Callable[[int], Diffeomorphism]


class DiffeoRegistry:
    """Registry of named diffeomorphisms."""

    # Factories take the ambient dimension
    _DIFFEOS: dict[str, DiffeoFactory] = {
        "identity": lambda dim: Identity(dim),
        "modeled": lambda dim: ModeledDoubleGaussian(),
    }

    @classmethod
    def get_diffeo(cls, spec: str, dim: int = 2) -> Diffeomorphism:
        """
        Resolve a diffeomorphism by name or checkpoint path.

        Args:
            spec: Registered name or path to a flow checkpoint (.json)
            dim: Ambient dimension for dimension-generic maps such as ``identity``

        Returns:
            Diffeomorphism instance

        Raises:
            ConfigError: If the name is unknown and no checkpoint exists at that path
        """
        factory = cls._DIFFEOS.get(spec.lower())
        if factory:
            diffeo = factory(dim)
            logger.info("diffeo_found", spec=spec, diffeo=diffeo.name, dim=diffeo.dim)
            return diffeo

        if Path(spec).suffix == ".json" or Path(spec).exists():
            from isoflow.flows.checkpoint import load_checkpoint

            return load_checkpoint(spec)

        logger.warning("no_diffeo_found", spec=spec, available=list(cls._DIFFEOS))
        raise ConfigError(
            f"unknown diffeomorphism '{spec}'", available=sorted(cls._DIFFEOS)
        )

    @classmethod
    def register_diffeo(cls, name: str, factory: DiffeoFactory) -> None:
        """
        Register a new diffeomorphism factory.

        Args:
            name: Lookup name (case-insensitive)
            factory: Callable taking the ambient dimension
        """
        cls._DIFFEOS[name.lower()] = factory
        logger.info("diffeo_registered", name=name)

    @classmethod
    def list_diffeos(cls) -> list[str]:
        """Registered names."""
        return sorted(cls._DIFFEOS)

    @classmethod
    def has_diffeo(cls, name: str) -> bool:
        return name.lower() in cls._DIFFEOS


def get_diffeo(spec: str, dim: int = 2) -> Diffeomorphism:
    """Convenience wrapper around ``DiffeoRegistry.get_diffeo``."""
    return DiffeoRegistry.get_diffeo(spec, dim)
