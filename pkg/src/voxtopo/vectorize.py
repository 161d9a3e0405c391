"""Fixed-length feature vectors from persistence diagrams.

Counting convention: a pair (b, d) is alive at level n iff b <= n < d, with
essential classes alive from b onward.  For the diagram {(3,5), (3,5),
(4,5)} at 5 levels this gives the Betti curve [0, 0, 2, 3, 0].  Note that
under this (or any other single-sided) convention the worked dimension-0
example {(1,inf), (1,2), (1,3), (1,3), (1,4), (2,3)} evaluates to
[5, 5, 2, 1, 1]; tabulations of the same diagram that report 4 at level 2
are inconsistent with their own loop counts and are treated as a
typographical slip.  The golden tests pin both vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .persistence import PersistenceDiagram


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    names: tuple[str, ...]


def _check_pairs(pd: PersistenceDiagram, levels: int) -> None:
    for b, d in pd.pairs:
        if not 1 <= b <= levels:
            raise ValueError(f"birth {b} outside [1, {levels}]")
        if d is not None and not (b < d <= levels):
            raise ValueError(f"death {d} invalid for birth {b} at {levels} levels")


def betti_curve(pd: PersistenceDiagram, levels: int) -> np.ndarray:
    """Number of classes alive at each level 1..levels (b <= n < d)."""
    _check_pairs(pd, levels)
    # difference array: +1 at birth, -1 at death, then prefix-sum
    diff = np.zeros(levels + 1, dtype=np.int64)
    for b, d in pd.pairs:
        diff[b - 1] += 1
        if d is not None:
            diff[d - 1] -= 1
    return np.cumsum(diff[:levels])


def silhouette(
    pd: PersistenceDiagram,
    levels: int,
    power: float = 1.0,
    drop_essential: bool = False,
) -> np.ndarray:
    """Weighted average of tent functions, sampled at levels 1..levels.

    Each pair contributes the tent max(0, min(n - b, d - n)) with weight
    (d - b) ** power; essential classes participate with d = levels + 1
    unless drop_essential is set.  A diagram with no contributing pairs
    gives the zero vector.
    """
    _check_pairs(pd, levels)
    if power < 0:
        raise ValueError(f"power must be >= 0, got {power}")
    births = []
    deaths = []
    for b, d in pd.pairs:
        if d is None:
            if drop_essential:
                continue
            d = levels + 1
        births.append(b)
        deaths.append(d)
    out = np.zeros(levels, dtype=np.float64)
    if not births:
        return out
    b_arr = np.asarray(births, dtype=np.float64)[:, None]
    d_arr = np.asarray(deaths, dtype=np.float64)[:, None]
    grid = np.arange(1, levels + 1, dtype=np.float64)[None, :]
    tents = np.maximum(0.0, np.minimum(grid - b_arr, d_arr - grid))
    weights = (d_arr - b_arr) ** power
    total = weights.sum()
    if total == 0.0:
        return out
    return (weights * tents).sum(axis=0) / total


def feature_names(kind: str, dims: Sequence[int], levels: int) -> tuple[str, ...]:
    prefix = {"betti": "b", "silhouette": "s"}[kind]
    return tuple(
        f"{prefix}{k}_{n:03d}" for k in dims for n in range(1, levels + 1)
    )


def assemble_features(
    diagrams: Iterable[PersistenceDiagram],
    levels: int,
    kind: str = "betti",
    power: float = 1.0,
    dims: Sequence[int] = (0, 1, 2),
) -> FeatureVector:
    """Concatenate one curve per requested dimension into a flat vector.

    kind is 'betti' or 'silhouette'.  The result has len(dims) * levels
    entries named like b0_001 .. b2_100, in ascending dimension order.
    """
    if kind not in ("betti", "silhouette"):
        raise ValueError(f"kind must be 'betti' or 'silhouette', got {kind!r}")
    dims = tuple(dims)
    if not dims or any(d not in (0, 1, 2) for d in dims) or len(set(dims)) != len(dims):
        raise ValueError(f"dims must be distinct values from (0, 1, 2), got {dims}")
    by_dim = {pd.dim: pd for pd in diagrams}
    blocks = []
    for d in dims:
        if d not in by_dim:
            raise ValueError(f"no diagram of dimension {d} supplied")
        if kind == "betti":
            blocks.append(betti_curve(by_dim[d], levels).astype(np.float64))
        else:
            blocks.append(silhouette(by_dim[d], levels, power))
    return FeatureVector(
        values=np.concatenate(blocks), names=feature_names(kind, dims, levels)
    )
