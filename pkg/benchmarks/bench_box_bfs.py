"""Compare the numba and numpy region-BFS backends on random 2-VASS.

    python benchmarks/bench_box_bfs.py [--instances 200] [--cap 120] [--band 6]

The box rows time the explicit strategy; the L-shape rows time the region
{x <= band or y <= band} used by belt runs.

Numba timings exclude the first (compiling) call.
"""
import argparse
import time

from flatvass import _kernels
from flatvass.core import ResourceCap
from flatvass.gen import gen_query, gen_random
from flatvass.solver import bounded_search


def run(instances, cap, use_numba):
    verdicts = []
    start = time.perf_counter()
    for seed in range(instances):
        v = gen_random(1 + seed % 4, 3 + seed % 4, 1 + seed % 3, seed)
        src, tgt = gen_query(v, seed)
        try:
            verdicts.append(bounded_search(v, src, tgt, cap=cap, use_numba=use_numba).reachable)
        except ResourceCap:
            verdicts.append(None)
    return time.perf_counter() - start, verdicts


def run_lshape(instances, cap, band, use_numba):
    verdicts = []
    start = time.perf_counter()
    for seed in range(instances):
        v = gen_random(1 + seed % 4, 3 + seed % 4, 1 + seed % 3, seed)
        src, tgt = gen_query(v, seed, max_norm=band)
        index = {q: n for n, q in enumerate(v.states)}
        T = v.transitions
        found, truncated, _ = _kernels.region_bfs(
            [index[t.src] for t in T], [t.update[0] for t in T], [t.update[1] for t in T],
            [index[t.dst] for t in T], len(v.states), band, cap,
            (index[src.state], *src.counters), (index[tgt.state], *tgt.counters), True, use_numba)
        verdicts.append((found, truncated))
    return time.perf_counter() - start, verdicts


def report(name, instances, cap, runner):
    if not _kernels.HAVE_NUMBA:
        t_np, _ = runner(instances, cap, False)
        print(f"{name:8s} numpy {t_np:8.3f}s")
        return
    runner(1, 8, True)  # compile
    t_nb, v_nb = runner(instances, cap, True)
    t_np, v_np = runner(instances, cap, False)
    print(f"{name:8s} numba {t_nb:8.3f}s  numpy {t_np:8.3f}s  "
          f"speedup {t_np / t_nb:6.1f}x  verdicts identical: {v_nb == v_np}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--cap", type=int, default=120)
    ap.add_argument("--band", type=int, default=6)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or disabled); timing numpy only")
    report("box", args.instances, args.cap, run)
    report("L-shape", args.instances, 20 * args.cap,
           lambda n, cap, nb: run_lshape(n, cap, args.band, nb))


if __name__ == "__main__":
    main()
