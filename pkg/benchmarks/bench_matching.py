"""Compare the compiled and pure Python matching kernels on real defect sets.

    python3 benchmarks/bench_matching.py --d 8 12 16 --p 0.02 --trials 5

Both kernels solve the same weight matrices; totals are checked for
equality and the median solve time of each is reported.
"""

import argparse
import statistics
import time

import numpy as np

from capredecode.lattice import CodeLattice
from capredecode.matching import DefectGraph, solve_weights
from capredecode.noise import sample_error, syndrome_of, trial_rng


def _total(w, partner):
    idx = np.arange(len(partner))
    return int(w[idx, partner].sum()) // 2


def bench(d, p, trials, seed):
    lat = CodeLattice(d)
    times = {"cython": [], "python": []}
    sizes = []
    for i in range(trials):
        s = syndrome_of(lat, sample_error(lat, p, trial_rng(seed, i)))
        w = DefectGraph.from_syndrome(lat, s).weights
        if len(w) == 0:
            continue
        sizes.append(len(w))
        totals = {}
        for backend in times:
            t0 = time.perf_counter()
            partner = solve_weights(w, backend)
            times[backend].append(time.perf_counter() - t0)
            totals[backend] = _total(w, partner)
        if totals["cython"] != totals["python"]:
            raise SystemExit(f"backends disagree at d={d}, trial {i}: {totals}")
    if not sizes:
        return None
    cy = statistics.median(times["cython"])
    py = statistics.median(times["python"])
    return d, statistics.mean(sizes), cy, py, py / cy


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--d", type=int, nargs="+", default=[8, 12, 16])
    ap.add_argument("--p", type=float, default=0.02)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    print(f"{'d':>4} {'mean |W|':>9} {'cython ms':>10} {'python ms':>10} {'speedup':>8}")
    for d in args.d:
        row = bench(d, args.p, args.trials, args.seed)
        if row is None:
            print(f"{d:>4}  (no defects)")
            continue
        d, n, cy, py, ratio = row
        print(f"{d:>4} {n:>9.1f} {cy * 1e3:>10.2f} {py * 1e3:>10.2f} {ratio:>7.1f}x")


if __name__ == "__main__":
    main()
