"""
Coupling masks.

Vector data use J = {j : j mod 2 = parity}; images use a checkerboard over (row + column)
parity shared by all channels. Blocks alternate the parity so that every coordinate gets
updated.
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from isoflow.diffeo.base import Array


@dataclass(frozen=True)
class MaskSpec:
    """Binary mask m_J over the flattened coordinates (1 on J, 0 elsewhere)."""

    kind: Literal["vector", "image"]
    parity: int
    mask: Array = field(repr=False)

    @classmethod
    def vector(cls, dim: int, parity: int) -> "MaskSpec":
        """Mask selecting indices j with j mod 2 == parity."""
        mask = (np.arange(dim) % 2 == parity % 2).astype(np.float64)
        return cls(kind="vector", parity=parity % 2, mask=mask)

    @classmethod
    def checkerboard(cls, shape: tuple[int, int, int], parity: int) -> "MaskSpec":
        """Checkerboard mask on (h + w) mod 2 == parity, shared across channels."""
        c, h, w = shape
        board = (np.add.outer(np.arange(h), np.arange(w)) % 2 == parity % 2).astype(np.float64)
        mask = np.broadcast_to(board, (c, h, w)).reshape(-1).copy()
        return cls(kind="image", parity=parity % 2, mask=mask)

    def complement(self) -> "MaskSpec":
        """Mask of the complementary index set."""
        return MaskSpec(kind=self.kind, parity=1 - self.parity, mask=1.0 - self.mask)

    @property
    def indices(self) -> Array:
        """Indices in J."""
        return np.flatnonzero(self.mask)

    @property
    def updated_indices(self) -> Array:
        """Indices an additive coupling with this mask updates (the complement of J)."""
        return np.flatnonzero(self.mask == 0.0)
