"""Pure-Python reduction backend.

Used when the compiled extension is unavailable or when VOXTOPO_PURE is set.
Both backends implement the same contract and must produce identical arrays:

- reduce_filtration: boundary-matrix reduction over Z/2 in decreasing cell
  dimension with the clearing optimization (a cell already claimed as a
  pivot by the previous pass is a known death and its column is skipped).
- dim0_pairs: union-find elder rule over vertices and edges in filtration
  order; the younger root dies, ties resolved toward the earlier position.

Positions index cells in filtration order; `order` maps position -> cell id
and `rank` is the inverse.  Pairs with equal birth and death bins are
dropped at the source.
"""

from __future__ import annotations

import numpy as np


def _boundary_positions(cid: int, cy: int, cz: int, rank) -> list[int]:
    cyz = cy * cz
    i, rem = divmod(cid, cyz)
    j, k = divmod(rem, cz)
    out = []
    if i & 1:
        out.append(rank[cid - cyz])
        out.append(rank[cid + cyz])
    if j & 1:
        out.append(rank[cid - cz])
        out.append(rank[cid + cz])
    if k & 1:
        out.append(rank[cid - 1])
        out.append(rank[cid + 1])
    out.sort()
    return out


def _xor_merge(a: list[int], b: list[int]) -> list[int]:
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x < y:
            out.append(x)
            i += 1
        elif y < x:
            out.append(y)
            j += 1
        else:
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return out


def reduce_filtration(order, rank, order_bins, order_dims, cx, cy, cz, reduce_dim0):
    """Reduce dimensions 3 and 2 (and 1 when reduce_dim0 is true).

    Returns (pair_dims, births, deaths, ess_dims, ess_bins) as numpy arrays.
    With reduce_dim0 false, dimension-0 classes are left to dim0_pairs.
    """
    n = len(order)
    order_l = order.tolist()
    rank_l = rank.tolist()
    bins_l = order_bins.tolist()
    pivot_owner = [-1] * n
    cols: dict[int, list[int]] = {}
    pair_dims: list[int] = []
    births: list[int] = []
    deaths: list[int] = []
    ess_dims: list[int] = []
    ess_bins: list[int] = []

    passes = (3, 2, 1) if reduce_dim0 else (3, 2)
    for d in passes:
        for p in np.flatnonzero(order_dims == d).tolist():
            if pivot_owner[p] != -1:
                continue
            col = _boundary_positions(order_l[p], cy, cz, rank_l)
            while col:
                piv = col[-1]
                own = pivot_owner[piv]
                if own == -1:
                    pivot_owner[piv] = p
                    cols[piv] = col
                    if bins_l[piv] != bins_l[p]:
                        pair_dims.append(d - 1)
                        births.append(bins_l[piv])
                        deaths.append(bins_l[p])
                    break
                col = _xor_merge(col, cols[piv])
            else:
                # column vanished and was not cleared: an essential class
                ess_dims.append(d)
                ess_bins.append(bins_l[p])

    if reduce_dim0:
        for p in range(n):
            if order_dims[p] == 0 and pivot_owner[p] == -1:
                ess_dims.append(0)
                ess_bins.append(bins_l[p])

    return (
        np.asarray(pair_dims, dtype=np.uint8),
        np.asarray(births, dtype=np.int32),
        np.asarray(deaths, dtype=np.int32),
        np.asarray(ess_dims, dtype=np.uint8),
        np.asarray(ess_bins, dtype=np.int32),
    )


def dim0_pairs(order, rank, order_bins, order_dims, cx, cy, cz):
    """Elder-rule pairing of dimension-0 classes via union-find.

    Returns (births, deaths, ess_bins) as numpy arrays.
    """
    n = len(order)
    order_l = order.tolist()
    rank_l = rank.tolist()
    bins_l = order_bins.tolist()
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    births: list[int] = []
    deaths: list[int] = []
    cyz = cy * cz
    for p in np.flatnonzero(order_dims == 1).tolist():
        cid = order_l[p]
        i, rem = divmod(cid, cyz)
        j, k = divmod(rem, cz)
        if i & 1:
            stride = cyz
        elif j & 1:
            stride = cz
        else:
            stride = 1
        ru = find(rank_l[cid - stride])
        rv = find(rank_l[cid + stride])
        if ru == rv:
            continue
        if ru > rv:
            ru, rv = rv, ru
        parent[rv] = ru
        if bins_l[rv] != bins_l[p]:
            births.append(bins_l[rv])
            deaths.append(bins_l[p])

    ess_bins = [
        bins_l[p]
        for p in np.flatnonzero(order_dims == 0).tolist()
        if find(p) == p
    ]
    return (
        np.asarray(births, dtype=np.int32),
        np.asarray(deaths, dtype=np.int32),
        np.asarray(ess_bins, dtype=np.int32),
    )
