"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both implementations are imported side by side, so the env flag that picks
the library-wide backend does not matter here.  The first numba call is
excluded from the timings (JIT compilation).
"""
import argparse
import time

import numpy as np

from genbound import _kernels as K


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    samples = rng.integers(0, 32, size=(200_000, 6))
    mu = rng.dirichlet(np.ones(32), size=50_000)
    codes = rng.integers(0, 64, size=(8, 400_000))
    sizes = np.full(8, 64)
    weights = rng.uniform(0, 1, size=400_000)
    return [
        ("row_counts", K.row_counts_numpy, K.row_counts_numba, (samples, 32)),
        ("projected_gd", K.projected_gd_numpy, K.projected_gd_numba, (mu, 0.05, 30)),
        ("coded_entropies", K.coded_entropies_numpy, K.coded_entropies_numba, (codes, sizes, weights)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  agree")
    for name, f_np, f_nb, a in cases(rng):
        f_nb(*a)  # compile
        ok = np.allclose(f_np(*a), f_nb(*a), atol=1e-10)
        t_np = best_of(f_np, a, args.repeat)
        t_nb = best_of(f_nb, a, args.repeat)
        print(f"{name:<18}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}  {ok}")


if __name__ == "__main__":
    main()
