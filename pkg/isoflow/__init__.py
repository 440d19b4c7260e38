"""
isoflow: pullback and iso-Riemannian geometry from constant-determinant normalizing flows.

Learns a diffeomorphism φ from data with a volume-preserving flow, equips the data space with
the pullback of the Euclidean metric, rescales the manifold mappings so that they respect
ambient ℓ² lengths, and evaluates tangent-space low-rank approximations in both geometries.
"""

__version__ = "0.1.0"

from isoflow.config import settings

__all__ = ["settings"]
