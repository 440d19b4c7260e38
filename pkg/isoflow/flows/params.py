"""
Flat parameter storage θ with a named layout.

Layers hold reshaped views into ``ParamVector.values`` so optimizers can update the flat
array in place.
"""

from dataclasses import dataclass

import numpy as np

from isoflow.diffeo.base import Array
from isoflow.errors import DataFormatError


@dataclass(frozen=True)
class ParamSlot:
    """Position of one named parameter block inside the flat vector."""

    offset: int
    shape: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))


class ParamVector:
    """Flat float64 vector of learnable parameters with a name → slot layout."""

    def __init__(self, layout: dict[str, ParamSlot], values: Array | None = None) -> None:
        total = sum(slot.size for slot in layout.values())
        self.layout = layout
        self.values = np.zeros(total) if values is None else np.asarray(values, dtype=np.float64)
        if self.values.shape != (total,):
            raise DataFormatError(
                f"parameter vector has length {self.values.size}, layout expects {total}"
            )

    @classmethod
    def allocate(cls, specs: list[tuple[str, tuple[int, ...]]]) -> "ParamVector":
        """
        Allocate a zero vector for named blocks in order.

        Args:
            specs: (name, shape) pairs

        Returns:
            ParamVector with contiguous, non-overlapping slots
        """
        layout: dict[str, ParamSlot] = {}
        offset = 0
        for name, shape in specs:
            if name in layout:
                raise DataFormatError(f"duplicate parameter name {name}")
            slot = ParamSlot(offset=offset, shape=tuple(shape))
            layout[name] = slot
            offset += slot.size
        return cls(layout)

    def __len__(self) -> int:
        return int(self.values.size)

    def view(self, name: str, flat: Array | None = None) -> Array:
        """
        Reshaped view of one block.

        Args:
            name: Block name
            flat: Array with this layout to view into (defaults to ``values``)

        Returns:
            Writable view sharing memory with the flat array
        """
        slot = self.layout[name]
        source = self.values if flat is None else flat
        return source[slot.offset : slot.offset + slot.size].reshape(slot.shape)

    def zeros_like(self) -> Array:
        """Flat zero array with this layout (e.g. for gradients)."""
        return np.zeros_like(self.values)

    def scatter(self, blocks: dict[str, Array], flat: Array | None = None) -> Array:
        """
        Write named blocks into a flat array with this layout.

        Args:
            blocks: name → array of the block's shape
            flat: Destination (a new zero array when omitted)

        Returns:
            The destination array
        """
        out = self.zeros_like() if flat is None else flat
        for name, block in blocks.items():
            self.view(name, out)[...] = block
        return out

    def nonfinite_blocks(self, flat: Array | None = None) -> list[str]:
        """Names of blocks containing NaN or inf."""
        return [
            name
            for name in self.layout
            if not np.all(np.isfinite(self.view(name, flat)))
        ]

    def to_dict(self) -> dict[str, list[float]]:
        """Block name → flat list of floats (checkpoint payload)."""
        return {name: self.view(name).reshape(-1).tolist() for name in self.layout}

    def load_dict(self, blocks: dict[str, list[float]]) -> None:
        """
        Load values saved by ``to_dict``.

        Args:
            blocks: Block name → flat list of floats
        """
        missing = set(self.layout) - set(blocks)
        extra = set(blocks) - set(self.layout)
        if missing or extra:
            raise DataFormatError(
                "parameter blocks do not match the layout",
                missing=sorted(missing),
                unexpected=sorted(extra),
            )
        for name, slot in self.layout.items():
            data = np.asarray(blocks[name], dtype=np.float64)
            if data.size != slot.size:
                raise DataFormatError(
                    f"block {name} has {data.size} values, expected {slot.size}"
                )
            self.view(name)[...] = data.reshape(slot.shape)

    def copy(self) -> "ParamVector":
        return ParamVector(dict(self.layout), self.values.copy())
