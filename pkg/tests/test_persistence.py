import numpy as np
import pytest

from voxtopo import _kernels
from voxtopo._kernels import reduction_py
from voxtopo.filtration import build_filtration
from voxtopo.persistence import (
    OracleLimitError,
    compute_diagrams,
    dim0_unionfind,
    euler_profile,
    reduce_naive,
)
from voxtopo.volume import QuantizedVolume

from conftest import random_qvol


def qvol(bins, levels):
    return QuantizedVolume(bins=np.asarray(bins, dtype=np.int32), levels=levels)


def betti_at(pd, n):
    return sum(1 for b, d in pd.pairs if b <= n and (d is None or n < d))


class TestGoldens:
    def test_three_voxel_line(self):
        f = build_filtration(qvol(np.array([2, 9, 3]).reshape(3, 1, 1), 10))
        pd0, pd1, pd2 = compute_diagrams(f)
        assert pd0.pairs == ((2, None), (3, 9))
        assert pd1.pairs == ()
        assert pd2.pairs == ()

    def test_hollow_cube_shell(self):
        # 3x3x3 shell of bin 2 around a bin-9 center, inside a 5x5x5 of bin 9
        bins = np.full((5, 5, 5), 9, dtype=np.int32)
        bins[1:4, 1:4, 1:4] = 2
        bins[2, 2, 2] = 9
        f = build_filtration(qvol(bins, 10))
        pd0, pd1, pd2 = compute_diagrams(f)
        assert pd0.pairs == ((2, None),)
        assert pd2.pairs == ((2, 9),)

    def test_constant_volume_single_class(self):
        f = build_filtration(qvol(np.full((3, 3, 3), 4), 8))
        pd0, pd1, pd2 = compute_diagrams(f)
        assert pd0.pairs == ((4, None),)
        assert pd1.pairs == ()
        assert pd2.pairs == ()

    def test_coordinates_are_bins_and_positive_persistence(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            q = random_qvol(rng)
            for pd in compute_diagrams(build_filtration(q)):
                for b, d in pd.pairs:
                    assert 1 <= b <= q.levels
                    if d is not None:
                        assert b < d <= q.levels

    def test_single_essential_class(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            q = random_qvol(rng)
            pds = compute_diagrams(build_filtration(q))
            ess = [(pd.dim, b) for pd in pds for b, d in pd.pairs if d is None]
            assert len(ess) == 1
            assert ess[0] == (0, int(q.bins.min()))


class TestOracleAgreement:
    def test_fast_equals_naive_on_corpus(self, random_corpus):
        for q in random_corpus[:40]:
            f = build_filtration(q)
            expected = reduce_naive(f)
            assert compute_diagrams(f, dim0="unionfind") == expected
            assert compute_diagrams(f, dim0="reduction") == expected
            assert dim0_unionfind(f) == expected[0]

    def test_fast_equals_naive_on_fixtures(self, fixture_volumes):
        for name, q in fixture_volumes.items():
            f = build_filtration(q)
            assert compute_diagrams(f) == reduce_naive(f), name

    def test_backends_identical(self, random_corpus):
        if _kernels.backend() != "compiled":
            pytest.skip("compiled backend unavailable")
        for q in random_corpus[:25]:
            f = build_filtration(q)
            cx, cy, cz = f.cell_shape
            args = (f.order, f.rank, f.cell_bins[f.order], f.cell_dims[f.order],
                    cx, cy, cz)
            for reduce_dim0 in (False, True):
                got = _kernels._impl.reduce_filtration(*args, reduce_dim0)
                want = reduction_py.reduce_filtration(*args, reduce_dim0)
                for a, b in zip(got, want):
                    assert np.array_equal(a, b)
                    assert a.dtype == b.dtype
            for a, b in zip(
                _kernels._impl.dim0_pairs(*args), reduction_py.dim0_pairs(*args)
            ):
                assert np.array_equal(a, b)

    def test_naive_limit(self):
        q = qvol(np.ones((20, 20, 14)), 5)
        f = build_filtration(q)
        assert f.n_cells > 20_000
        with pytest.raises(OracleLimitError):
            reduce_naive(f)
        reduce_naive(f, limit=50_000)


class TestEulerIdentity:
    def test_profile_matches_alternating_betti(self, random_corpus, fixture_volumes):
        volumes = random_corpus[:30] + list(fixture_volumes.values())
        for q in volumes:
            f = build_filtration(q)
            pd0, pd1, pd2 = compute_diagrams(f)
            chi = euler_profile(f)
            for n in range(1, q.levels + 1):
                expected = betti_at(pd0, n) - betti_at(pd1, n) + betti_at(pd2, n)
                assert chi[n - 1] == expected

    def test_profile_golden(self):
        f = build_filtration(qvol(np.full((2, 2, 2), 5), 10))
        assert euler_profile(f).tolist() == [0, 0, 0, 0, 1, 1, 1, 1, 1, 1]


class TestInvariances:
    def test_monotone_relabel_permutes_coordinates(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            q = random_qvol(rng)
            # strictly increasing random map of 1..levels into 1..new_levels
            jumps = rng.integers(1, 4, size=q.levels)
            table = np.concatenate([[0], np.cumsum(jumps)]).astype(np.int32)
            new_levels = int(table[-1])
            relabeled = QuantizedVolume(bins=table[q.bins], levels=new_levels)

            base = compute_diagrams(build_filtration(q))
            mapped = compute_diagrams(build_filtration(relabeled))
            for pd_base, pd_mapped in zip(base, mapped):
                expected = tuple(
                    (int(table[b]), None if d is None else int(table[d]))
                    for b, d in pd_base.pairs
                )
                assert pd_mapped.pairs == expected

    def test_superlevel_equals_reflected_sublevel_diagrams(self):
        rng = np.random.default_rng(24)
        for _ in range(10):
            q = random_qvol(rng)
            sup = compute_diagrams(build_filtration(q, "superlevel"))
            refl = QuantizedVolume(
                bins=(q.levels + 1 - q.bins).astype(np.int32), levels=q.levels
            )
            sub = compute_diagrams(build_filtration(refl))
            assert sup == sub

    def test_dim0_modes_agree(self, random_corpus):
        for q in random_corpus[40:70]:
            f = build_filtration(q)
            assert (
                compute_diagrams(f, dim0="unionfind")
                == compute_diagrams(f, dim0="reduction")
            )

    def test_bad_dim0_mode(self):
        f = build_filtration(qvol(np.ones((2, 2, 2)), 3))
        with pytest.raises(ValueError, match="dim0"):
            compute_diagrams(f, dim0="magic")
