"""Time the compiled reduction kernel against the pure-Python fallback.

Both backends are imported directly (ignoring VOXTOPO_PURE) and run on
the same inputs; the script asserts that their outputs agree bit for bit
before reporting timings.

Usage: python benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import time

import numpy as np

from voxtopo._kernels import reduction_py
from voxtopo.filtration import build_filtration
from voxtopo.phantoms import PhantomSpec, generate
from voxtopo.volume import QuantizedVolume

try:
    from voxtopo._kernels import _reduction as compiled
except ImportError:
    compiled = None


def workloads():
    rng = np.random.default_rng(1234)
    yield "noise 8^3", QuantizedVolume(
        bins=rng.integers(1, 11, size=(8, 8, 8)).astype(np.int32), levels=10
    )
    yield "noise 16^3", QuantizedVolume(
        bins=rng.integers(1, 101, size=(16, 16, 16)).astype(np.int32), levels=100
    )
    yield "ball 16^3", generate(PhantomSpec("solid_ball", noise=1, seed=1))
    yield "torus 20x20x12", generate(PhantomSpec("solid_torus", noise=1, seed=2))
    yield "noise 32^3", QuantizedVolume(
        bins=rng.integers(1, 101, size=(32, 32, 32)).astype(np.int32), levels=100
    )


def run_backend(impl, f, reduce_dim0):
    cx, cy, cz = f.cell_shape
    order_bins = f.cell_bins[f.order]
    order_dims = f.cell_dims[f.order]
    args = (f.order, f.rank, order_bins, order_dims, cx, cy, cz)
    out = impl.reduce_filtration(*args, reduce_dim0)
    if not reduce_dim0:
        out = out + impl.dim0_pairs(*args)
    return out


def check_equal(a, b, label):
    assert len(a) == len(b), label
    for i, (x, y) in enumerate(zip(a, b)):
        assert x.dtype == y.dtype, f"{label}: dtype mismatch in output {i}"
        assert np.array_equal(x, y), f"{label}: value mismatch in output {i}"


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions, best is kept (default 3)")
    args = parser.parse_args()

    if compiled is None:
        print("compiled backend not available; showing pure timings only\n")

    header = f"{'workload':<16} {'cells':>8} {'pure':>10}"
    if compiled is not None:
        header += f" {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))

    for label, qvol in workloads():
        f = build_filtration(qvol)
        n_cells = f.order.shape[0]
        for mode in (True, False):
            if compiled is not None:
                check_equal(
                    run_backend(reduction_py, f, mode),
                    run_backend(compiled, f, mode),
                    f"{label} (reduce_dim0={mode})",
                )
        t_pure = best_of(lambda: run_backend(reduction_py, f, False), args.repeat)
        line = f"{label:<16} {n_cells:>8} {t_pure * 1e3:>8.1f}ms"
        if compiled is not None:
            t_comp = best_of(lambda: run_backend(compiled, f, False), args.repeat)
            line += f" {t_comp * 1e3:>8.1f}ms {t_pure / t_comp:>7.1f}x"
        print(line)

    if compiled is not None:
        print("\nall outputs identical across backends")


if __name__ == "__main__":
    main()
