"""Time the numba and numpy flavours of every hot kernel.

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

Both flavours are called directly, so the result does not depend on
FWCI_DISABLE_NUMBA.  The first numba call (compilation) is excluded.
"""
import argparse
import math
import time

import numpy as np

from fwci import _accel, kernels
from fwci.problems.asian import OptionParams, _log_mean_terms, bridge_plan


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, rng):
    y = rng.standard_normal(n)
    u = rng.random(n)
    x = rng.random((n // 4, 4))
    hump = (0.1, 2.0, np.array([1.0, 5.0, 0.3, 2.0]), np.array([0.1, 1e-3, 0.5, 0.05]), rng.random(4))
    d = 16
    z = rng.standard_normal((n // d, d))
    plan = bridge_plan(1.0, d)
    lin, coef = _log_mean_terms(OptionParams(v=0.4, d=d))
    pay = (*plan, coef, lin, 100.0, math.exp(-0.03))
    fill_out = np.empty((z.shape[0], d + 1))
    ndtri_out = np.empty_like(u)
    return {
        "chunk_moments": (lambda: kernels._chunk_moments_nb(y), lambda: kernels._chunk_moments_np(y)),
        "normal_from_uniform": (lambda: kernels._normal_from_uniform_nb(u, ndtri_out),
                                lambda: kernels._normal_from_uniform_np(u)),
        "hump_values": (lambda: kernels._hump_values_nb(x, *hump), lambda: kernels._hump_values_np(x, *hump)),
        "bridge_fill": (lambda: kernels._bridge_fill_nb(z, *plan, fill_out),
                        lambda: kernels._bridge_fill_np(z, *plan, fill_out)),
        "asian_payoffs": (lambda: kernels._asian_payoffs_nb(z, *pay), lambda: kernels._asian_payoffs_np(z, *pay)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000, help="scalar draws per call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for name, (nb, np_) in cases(args.n, rng).items():
        nb()  # compile
        t_nb = best_of(nb, args.repeat)
        t_np = best_of(np_, args.repeat)
        print(f"{name:<22}{1e3 * t_nb:>10.2f}{1e3 * t_np:>10.2f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
