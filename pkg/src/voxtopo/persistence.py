"""Persistence diagrams of a filtered cubical complex.

compute_diagrams is the production path (compiled kernel when available).
reduce_naive is a deliberately simple single-pass reduction kept as an
oracle for testing: no clearing, no dimension grouping, columns held as
integer bitmasks.  Diagram coordinates are filtration bins; an essential
class has death None.  Zero-persistence pairs are dropped everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .filtration import CubicalFiltration

NAIVE_CELL_LIMIT = 20_000


class OracleLimitError(RuntimeError):
    """reduce_naive refuses complexes larger than its cell limit."""


@dataclass(frozen=True)
class PersistenceDiagram:
    dim: int
    pairs: tuple[tuple[int, int | None], ...]

    def finite(self) -> tuple[tuple[int, int], ...]:
        return tuple(p for p in self.pairs if p[1] is not None)

    def essential(self) -> tuple[tuple[int, None], ...]:
        return tuple(p for p in self.pairs if p[1] is None)


def _sorted_pairs(pairs):
    return tuple(
        sorted(pairs, key=lambda bd: (bd[0], np.inf if bd[1] is None else bd[1]))
    )


def _assemble(pair_dims, births, deaths, ess_dims, ess_bins):
    buckets: list[list[tuple[int, int | None]]] = [[], [], []]
    for d, b, dth in zip(pair_dims.tolist(), births.tolist(), deaths.tolist()):
        buckets[d].append((b, dth))
    for d, b in zip(ess_dims.tolist(), ess_bins.tolist()):
        if d > 2:
            raise AssertionError(f"essential class of dimension {d} in a solid box")
        buckets[d].append((b, None))
    return tuple(
        PersistenceDiagram(dim=d, pairs=_sorted_pairs(buckets[d])) for d in range(3)
    )


def compute_diagrams(
    f: CubicalFiltration, dim0: str = "unionfind"
) -> tuple[PersistenceDiagram, PersistenceDiagram, PersistenceDiagram]:
    """Compute (PD_0, PD_1, PD_2).

    dim0 selects how dimension-0 classes are paired: 'unionfind' (the
    default) runs the elder-rule pass, 'reduction' reduces dimension-1
    boundary columns as well.  Both give identical diagrams.
    """
    if dim0 not in ("unionfind", "reduction"):
        raise ValueError(f"dim0 must be 'unionfind' or 'reduction', got {dim0!r}")
    cx, cy, cz = f.cell_shape
    order_bins = f.cell_bins[f.order]
    order_dims = f.cell_dims[f.order]
    args = (f.order, f.rank, order_bins, order_dims, cx, cy, cz)
    if dim0 == "reduction":
        return _assemble(*_kernels.reduce_filtration(*args, True))
    pair_dims, births, deaths, ess_dims, ess_bins = _kernels.reduce_filtration(
        *args, False
    )
    b0, d0, e0 = _kernels.dim0_pairs(*args)
    pair_dims = np.concatenate([pair_dims, np.zeros(len(b0), dtype=np.uint8)])
    births = np.concatenate([births, b0])
    deaths = np.concatenate([deaths, d0])
    ess_dims = np.concatenate([ess_dims, np.zeros(len(e0), dtype=np.uint8)])
    ess_bins = np.concatenate([ess_bins, e0])
    return _assemble(pair_dims, births, deaths, ess_dims, ess_bins)


def dim0_unionfind(f: CubicalFiltration) -> PersistenceDiagram:
    """PD_0 alone via the union-find elder rule."""
    cx, cy, cz = f.cell_shape
    order_bins = f.cell_bins[f.order]
    order_dims = f.cell_dims[f.order]
    births, deaths, ess = _kernels.dim0_pairs(
        f.order, f.rank, order_bins, order_dims, cx, cy, cz
    )
    pairs = [(b, d) for b, d in zip(births.tolist(), deaths.tolist())]
    pairs.extend((b, None) for b in ess.tolist())
    return PersistenceDiagram(dim=0, pairs=_sorted_pairs(pairs))


def reduce_naive(
    f: CubicalFiltration, limit: int = NAIVE_CELL_LIMIT
) -> tuple[PersistenceDiagram, PersistenceDiagram, PersistenceDiagram]:
    """Textbook left-to-right column reduction over every cell at once.

    Columns are bitmask integers indexed by filtration position.  Quadratic
    in the worst case and memory-hungry, hence the cell limit; meant as an
    independent check of compute_diagrams, not for production use.
    """
    n = f.n_cells
    if n > limit:
        raise OracleLimitError(f"{n} cells exceeds the naive limit of {limit}")
    order = f.order.tolist()
    rank = f.rank.tolist()
    bins = f.cell_bins[f.order].tolist()
    dims = f.cell_dims[f.order].tolist()

    low_owner: dict[int, int] = {}
    stored: dict[int, int] = {}
    unpaired: set[int] = set()
    paired: list[tuple[int, int]] = []
    for p in range(n):
        mask = 0
        for fid in f.boundary_ids(order[p]):
            mask |= 1 << rank[fid]
        while mask:
            piv = mask.bit_length() - 1
            owner = low_owner.get(piv)
            if owner is None:
                low_owner[piv] = p
                stored[p] = mask
                unpaired.discard(piv)
                paired.append((piv, p))
                break
            mask ^= stored[owner]
        if mask == 0:
            unpaired.add(p)

    buckets: list[list[tuple[int, int | None]]] = [[], [], [], []]
    for piv, p in paired:
        if bins[piv] != bins[p]:
            buckets[dims[piv]].append((bins[piv], bins[p]))
    for p in sorted(unpaired):
        buckets[dims[p]].append((bins[p], None))
    if buckets[3]:
        raise AssertionError("essential 3-class in a solid box")
    return tuple(
        PersistenceDiagram(dim=d, pairs=_sorted_pairs(buckets[d])) for d in range(3)
    )


def euler_profile(f: CubicalFiltration) -> np.ndarray:
    """Euler characteristic of each sublevel complex, index n-1 for bin n."""
    chi = np.empty(f.levels, dtype=np.int64)
    for n in range(1, f.levels + 1):
        c0, c1, c2, c3 = f.cells_at_or_below(n)
        chi[n - 1] = c0 - c1 + c2 - c3
    return chi
