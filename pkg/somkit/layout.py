"""Cell geometry for drawing a map lattice."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .topology import MapTopology, unit_coords


@dataclass(frozen=True)
class CellFrame:
    """Bounds of one unit's cell on the canvas."""

    left: float
    top: float
    width: float
    height: float

    @property
    def cx(self) -> float:
        return self.left + self.width / 2

    @property
    def cy(self) -> float:
        return self.top + self.height / 2

    def inset(self, pad: float) -> "CellFrame":
        return CellFrame(self.left + pad, self.top + pad, self.width - 2 * pad, self.height - 2 * pad)


@dataclass(frozen=True)
class MapLayout:
    """Canvas of (cols * cell + 2 margin) x (rows * cell + 2 margin) pixels.

    A string has one column, so it is drawn top to bottom. Hexgrid cells are
    narrowed so that odd rows, shifted by half a cell, still fit in the same
    canvas.
    """

    topo: MapTopology
    cell: int
    margin: int

    @property
    def grid_shape(self) -> Tuple[int, int]:
        return self.topo.rows, self.topo.cols

    @property
    def width(self) -> int:
        return self.topo.cols * self.cell + 2 * self.margin

    @property
    def height(self) -> int:
        return self.topo.rows * self.cell + 2 * self.margin

    def _cell_width(self) -> float:
        cols = self.topo.cols
        if self.topo.kind == "hexgrid" and self.topo.rows > 1:
            return self.cell * cols / (cols + 0.5)
        return float(self.cell)

    def cell_frame(self, unit: int) -> CellFrame:
        row, col = unit_coords(self.topo, unit)
        width = self._cell_width()
        left = self.margin + col * width
        if self.topo.kind == "hexgrid" and row % 2 == 1:
            left += width / 2
        return CellFrame(left, float(self.margin + row * self.cell), width, float(self.cell))

    def frames(self) -> List[CellFrame]:
        return [self.cell_frame(u) for u in range(self.topo.unit_count)]


def map_layout(topo: MapTopology, cell: int, margin: int) -> MapLayout:
    """Return the layout for ``topo`` drawn with square cells of ``cell`` pixels."""
    return MapLayout(topo, cell, margin)


__all__ = ["CellFrame", "MapLayout", "map_layout"]
