"""Filtered cubical complex built on the voxel-center grid.

A volume with dims (nx, ny, nz) induces a cell grid of shape
(2nx-1, 2ny-1, 2nz-1): voxel (a, b, c) sits at even coordinates
(2a, 2b, 2c), and a cell's dimension is the number of odd coordinates.
Each cell spans 2^dim voxels (per axis, coordinate i covers voxels i//2
and (i+1)//2) and enters the filtration at the largest bin among them, so
every cell appears no earlier than any of its faces.  A constant 2x2x2
volume therefore yields 8 vertices, 12 edges, 6 squares and 1 cube.

Superlevel filtrations reuse the same machinery on reflected bins
(b -> levels + 1 - b).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .volume import QuantizedVolume

DIRECTIONS = ("sublevel", "superlevel")


class Cell(NamedTuple):
    id: int
    dim: int
    filtration_bin: int


class CubicalFiltration:
    """Cells of a quantized volume in filtration order.

    Cell ids enumerate the cell grid in C order; `order` lists ids sorted by
    (bin, dim, id) and `rank` is its inverse.
    """

    __slots__ = (
        "dims",
        "cell_shape",
        "levels",
        "direction",
        "cell_bins",
        "cell_dims",
        "order",
        "rank",
        "_cum_counts",
    )

    def __init__(self, dims, cell_shape, levels, direction, cell_bins, cell_dims):
        self.dims = dims
        self.cell_shape = cell_shape
        self.levels = levels
        self.direction = direction
        self.cell_bins = cell_bins
        self.cell_dims = cell_dims
        self.order = np.lexsort((cell_dims, cell_bins)).astype(np.int32)
        self.rank = np.empty(len(self.order), dtype=np.int32)
        self.rank[self.order] = np.arange(len(self.order), dtype=np.int32)
        self._cum_counts = None

    @property
    def n_cells(self) -> int:
        return self.cell_bins.shape[0]

    def cell(self, cell_id: int) -> Cell:
        return Cell(cell_id, int(self.cell_dims[cell_id]), int(self.cell_bins[cell_id]))

    def cell_coords(self, cell_id: int) -> tuple[int, int, int]:
        cx, cy, cz = self.cell_shape
        i, rem = divmod(cell_id, cy * cz)
        j, k = divmod(rem, cz)
        return i, j, k

    def boundary_ids(self, cell_id: int) -> list[int]:
        """Ids of the 2*dim codimension-1 faces, axis by axis, minus side first."""
        cx, cy, cz = self.cell_shape
        i, j, k = self.cell_coords(cell_id)
        faces = []
        if i & 1:
            faces.append(((i - 1) * cy + j) * cz + k)
            faces.append(((i + 1) * cy + j) * cz + k)
        if j & 1:
            faces.append((i * cy + (j - 1)) * cz + k)
            faces.append((i * cy + (j + 1)) * cz + k)
        if k & 1:
            faces.append((i * cy + j) * cz + k - 1)
            faces.append((i * cy + j) * cz + k + 1)
        return faces

    def _counts_table(self) -> np.ndarray:
        # _cum_counts[d, b] = number of dim-d cells with bin <= b
        if self._cum_counts is None:
            table = np.zeros((4, self.levels + 1), dtype=np.int64)
            np.add.at(table, (self.cell_dims, self.cell_bins), 1)
            self._cum_counts = np.cumsum(table, axis=1)
        return self._cum_counts

    def cells_at_or_below(self, filtration_bin: int) -> tuple[int, int, int, int]:
        """Counts (c_0, c_1, c_2, c_3) of cells with bin <= filtration_bin."""
        b = min(max(int(filtration_bin), 0), self.levels)
        table = self._counts_table()
        return tuple(int(table[d, b]) for d in range(4))


def build_filtration(
    qvol: QuantizedVolume, direction: str = "sublevel"
) -> CubicalFiltration:
    """Build the filtered cubical complex of a quantized volume."""
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    bins = qvol.bins
    if direction == "superlevel":
        bins = qvol.levels + 1 - bins
    nx, ny, nz = bins.shape
    cx, cy, cz = 2 * nx - 1, 2 * ny - 1, 2 * nz - 1

    lo = [np.arange(c) // 2 for c in (cx, cy, cz)]
    hi = [(np.arange(c) + 1) // 2 for c in (cx, cy, cz)]
    cell_bins = bins[np.ix_(lo[0], lo[1], lo[2])].astype(np.int32)
    for sx in (0, 1):
        for sy in (0, 1):
            for sz in (0, 1):
                if sx == sy == sz == 0:
                    continue
                picks = (
                    (hi[0] if sx else lo[0]),
                    (hi[1] if sy else lo[1]),
                    (hi[2] if sz else lo[2]),
                )
                np.maximum(cell_bins, bins[np.ix_(*picks)], out=cell_bins)

    parity = [np.arange(c, dtype=np.uint8) & 1 for c in (cx, cy, cz)]
    cell_dims = (
        parity[0][:, None, None] + parity[1][None, :, None] + parity[2][None, None, :]
    )

    return CubicalFiltration(
        dims=(nx, ny, nz),
        cell_shape=(cx, cy, cz),
        levels=qvol.levels,
        direction=direction,
        cell_bins=cell_bins.ravel(),
        cell_dims=cell_dims.ravel(),
    )
