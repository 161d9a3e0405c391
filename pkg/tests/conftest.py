import numpy as np
import pytest

from voxtopo.phantoms import PhantomSpec, generate
from voxtopo.volume import QuantizedVolume


def random_qvol(rng, max_side=6, force_2d=False):
    dims = [int(d) for d in rng.integers(1, max_side + 1, size=3)]
    if force_2d:
        dims[2] = 1
    levels = int(rng.integers(2, 12))
    bins = rng.integers(1, levels + 1, size=tuple(dims)).astype(np.int32)
    return QuantizedVolume(bins=bins, levels=levels)


@pytest.fixture(scope="session")
def random_corpus():
    """100 seeded random volumes up to 6x6x6, every seventh flat in z."""
    rng = np.random.default_rng(20240817)
    return [random_qvol(rng, force_2d=(i % 7 == 0)) for i in range(100)]


@pytest.fixture(scope="session")
def fixture_volumes():
    """Structured volumes with known or oracle-checkable topology."""
    vols = {
        "constant": QuantizedVolume(bins=np.full((3, 3, 3), 4, dtype=np.int32), levels=8),
        "ramp": QuantizedVolume(
            bins=np.arange(1, 25, dtype=np.int32).reshape(2, 3, 4), levels=24
        ),
        "checker": QuantizedVolume(
            bins=(1 + np.indices((4, 4, 4)).sum(axis=0) % 2).astype(np.int32), levels=2
        ),
        "small_ball": generate(
            PhantomSpec("solid_ball", dims=(11, 11, 11), levels=10,
                        geometry={"radius": 3.0},
                        foreground_bin=3, background_bin=8)
        ),
        "small_shell": generate(
            PhantomSpec("hollow_shell", dims=(12, 12, 12), levels=10,
                        geometry={"inner_radius": 2.5, "outer_radius": 4.5},
                        foreground_bin=3, background_bin=8)
        ),
        "small_torus": generate(
            PhantomSpec("solid_torus", dims=(14, 14, 10), levels=10,
                        geometry={"ring_radius": 4.0, "tube_radius": 2.0},
                        foreground_bin=3, background_bin=8)
        ),
        "small_blobs": generate(
            PhantomSpec("two_blobs", dims=(14, 9, 9), levels=10,
                        geometry={"radius": 2.0, "separation": 7.0},
                        foreground_bin=3, background_bin=8)
        ),
        "noise": generate(
            PhantomSpec("random_noise", dims=(6, 6, 6), levels=12, seed=5)
        ),
    }
    return vols
