# distutils: language = c++
"""Compiled reduction backend.

Mirrors reduction_py exactly: same passes, same clearing rule, same
union-find tie-breaks, same output ordering.  Columns are sorted
std::vectors of filtration positions.
"""

import numpy as np

cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()


cdef void _boundary_positions(Py_ssize_t cid, Py_ssize_t cy, Py_ssize_t cz,
                              const int[::1] rank, vector[int]& out):
    cdef Py_ssize_t cyz = cy * cz
    cdef Py_ssize_t i = cid // cyz
    cdef Py_ssize_t rem = cid - i * cyz
    cdef Py_ssize_t j = rem // cz
    cdef Py_ssize_t k = rem - j * cz
    cdef Py_ssize_t a, b
    cdef int tmp
    out.clear()
    if i & 1:
        out.push_back(rank[cid - cyz])
        out.push_back(rank[cid + cyz])
    if j & 1:
        out.push_back(rank[cid - cz])
        out.push_back(rank[cid + cz])
    if k & 1:
        out.push_back(rank[cid - 1])
        out.push_back(rank[cid + 1])
    # insertion sort; at most 6 entries
    for a in range(1, <Py_ssize_t>out.size()):
        tmp = out[a]
        b = a
        while b > 0 and out[b - 1] > tmp:
            out[b] = out[b - 1]
            b -= 1
        out[b] = tmp


cdef void _xor_merge(const vector[int]& a, const vector[int]& b, vector[int]& out):
    cdef size_t i = 0, j = 0
    cdef size_t na = a.size(), nb = b.size()
    cdef int x, y
    out.clear()
    while i < na and j < nb:
        x = a[i]
        y = b[j]
        if x < y:
            out.push_back(x)
            i += 1
        elif y < x:
            out.push_back(y)
            j += 1
        else:
            i += 1
            j += 1
    while i < na:
        out.push_back(a[i])
        i += 1
    while j < nb:
        out.push_back(b[j])
        j += 1


cdef object _as_i32(vector[int]& v):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] arr = np.empty(v.size(), dtype=np.int32)
    cdef size_t i
    for i in range(v.size()):
        arr[i] = v[i]
    return arr


cdef object _as_u8(vector[int]& v):
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] arr = np.empty(v.size(), dtype=np.uint8)
    cdef size_t i
    for i in range(v.size()):
        arr[i] = <cnp.uint8_t>v[i]
    return arr


def reduce_filtration(order, rank, order_bins, order_dims,
                      Py_ssize_t cx, Py_ssize_t cy, Py_ssize_t cz,
                      bint reduce_dim0):
    cdef const int[::1] order_v = np.ascontiguousarray(order, dtype=np.int32)
    cdef const int[::1] rank_v = np.ascontiguousarray(rank, dtype=np.int32)
    cdef const int[::1] bins_v = np.ascontiguousarray(order_bins, dtype=np.int32)
    order_dims = np.ascontiguousarray(order_dims, dtype=np.uint8)
    cdef Py_ssize_t n = order_v.shape[0]

    cdef cnp.ndarray[cnp.int32_t, ndim=1] pivot_owner_arr = np.full(n, -1, dtype=np.int32)
    cdef int[::1] pivot_owner = pivot_owner_arr
    cdef cnp.ndarray[cnp.int32_t, ndim=1] stored_idx_arr = np.full(n, -1, dtype=np.int32)
    cdef int[::1] stored_idx = stored_idx_arr
    cdef vector[vector[int]] stored

    cdef vector[int] pair_dim_v, birth_v, death_v, ess_dim_v, ess_bin_v
    cdef vector[int] col, tmp
    cdef Py_ssize_t p, idx
    cdef int piv, own, d
    cdef bint claimed
    cdef const int[::1] positions

    passes = [3, 2, 1] if reduce_dim0 else [3, 2]
    for d in passes:
        positions = np.flatnonzero(order_dims == d).astype(np.int32)
        for idx in range(positions.shape[0]):
            p = positions[idx]
            if pivot_owner[p] != -1:
                continue
            _boundary_positions(order_v[p], cy, cz, rank_v, col)
            claimed = False
            while col.size() > 0:
                piv = col.back()
                own = pivot_owner[piv]
                if own == -1:
                    pivot_owner[piv] = <int>p
                    stored_idx[piv] = <int>stored.size()
                    stored.push_back(col)
                    if bins_v[piv] != bins_v[p]:
                        pair_dim_v.push_back(d - 1)
                        birth_v.push_back(bins_v[piv])
                        death_v.push_back(bins_v[p])
                    claimed = True
                    break
                _xor_merge(col, stored[stored_idx[piv]], tmp)
                col.swap(tmp)
            if not claimed:
                ess_dim_v.push_back(d)
                ess_bin_v.push_back(bins_v[p])

    cdef const cnp.uint8_t[::1] dims_v = order_dims
    if reduce_dim0:
        for p in range(n):
            if dims_v[p] == 0 and pivot_owner[p] == -1:
                ess_dim_v.push_back(0)
                ess_bin_v.push_back(bins_v[p])

    return (
        _as_u8(pair_dim_v),
        _as_i32(birth_v),
        _as_i32(death_v),
        _as_u8(ess_dim_v),
        _as_i32(ess_bin_v),
    )


cdef int _find(int[::1] parent, int x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def dim0_pairs(order, rank, order_bins, order_dims,
               Py_ssize_t cx, Py_ssize_t cy, Py_ssize_t cz):
    cdef const int[::1] order_v = np.ascontiguousarray(order, dtype=np.int32)
    cdef const int[::1] rank_v = np.ascontiguousarray(rank, dtype=np.int32)
    cdef const int[::1] bins_v = np.ascontiguousarray(order_bins, dtype=np.int32)
    order_dims = np.ascontiguousarray(order_dims, dtype=np.uint8)
    cdef const cnp.uint8_t[::1] dims_v = order_dims
    cdef Py_ssize_t n = order_v.shape[0]

    cdef cnp.ndarray[cnp.int32_t, ndim=1] parent_arr = np.arange(n, dtype=np.int32)
    cdef int[::1] parent = parent_arr

    cdef vector[int] birth_v, death_v, ess_v
    cdef Py_ssize_t cyz = cy * cz
    cdef Py_ssize_t p, cid, i, j, rem, stride
    cdef int ru, rv, swap

    for p in range(n):
        if dims_v[p] != 1:
            continue
        cid = order_v[p]
        i = cid // cyz
        rem = cid - i * cyz
        j = rem // cz
        if i & 1:
            stride = cyz
        elif j & 1:
            stride = cz
        else:
            stride = 1
        ru = _find(parent, rank_v[cid - stride])
        rv = _find(parent, rank_v[cid + stride])
        if ru == rv:
            continue
        if ru > rv:
            swap = ru
            ru = rv
            rv = swap
        parent[rv] = ru
        if bins_v[rv] != bins_v[p]:
            birth_v.push_back(bins_v[rv])
            death_v.push_back(bins_v[p])

    for p in range(n):
        if dims_v[p] == 0 and _find(parent, <int>p) == p:
            ess_v.push_back(bins_v[p])

    return (_as_i32(birth_v), _as_i32(death_v), _as_i32(ess_v))
