"""Compare the numba and numpy kernel paths.

    python benchmarks/bench_kernels.py [--sizes 12 16 20] [--repeat 3]

The first numba call for each kernel includes compilation (cached on disk
afterwards), so each row reports the best of ``--repeat`` warm runs.
"""

import argparse
import time

import numpy as np

from apcert import _kernels
from apcert.aps import ap_table
from apcert.groups import build_cyclic, parse_group_spec


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_search(n, repeat):
    G = build_cyclic(n)
    tab = ap_table(G, 3)
    ptr, idx = tab.incidence()
    args = (tab.elements, ptr, idx, n, 0, n - 1, 16)
    _kernels.gray_search_numba(*args)  # compile
    t_nb, a = best_of(lambda: _kernels.gray_search_numba(*args), repeat)
    t_np, b = best_of(lambda: _kernels.gray_search_numpy(*args), repeat)
    assert a == b, (a, b)
    return t_nb, t_np


def bench_ap_rows(spec, repeat):
    G = parse_group_spec(spec)
    bs = np.flatnonzero(G.element_orders() >= 3).astype(np.int64)
    _kernels.ap_rows_numba(G.mul, bs, 3)
    t_nb, a = best_of(lambda: _kernels.ap_rows_numba(G.mul, bs, 3), repeat)
    t_np, b = best_of(lambda: _kernels.ap_rows_numpy(G.mul, bs, 3), repeat)
    assert np.array_equal(a, b)
    return t_nb, t_np


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[12, 16, 20])
    p.add_argument("--groups", nargs="+", default=["S5", "S6"])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':<22}{'numba s':>10}{'numpy s':>10}{'speedup':>9}")
    for n in args.sizes:
        t_nb, t_np = bench_search(n, args.repeat)
        print(f"{'gray_search Z' + str(n):<22}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>9.1f}")
    for spec in args.groups:
        t_nb, t_np = bench_ap_rows(spec, args.repeat)
        print(f"{'ap_rows ' + spec:<22}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>9.1f}")


if __name__ == "__main__":
    main()
