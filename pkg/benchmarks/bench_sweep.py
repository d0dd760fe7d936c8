#!/usr/bin/env python3
"""Benchmark the numba sweep kernels against the pure-numpy fallback.

Runs the worst-case sweep workload (all opponent profiles of one agent) on
a few instance shapes and reports per-backend wall time and speedup.  Both
backends must return identical results; this is asserted on every run.

Usage:
    python benchmarks/bench_sweep.py [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from rankmin import Instance, Preference
from rankmin.audit import _perm_tables, _pref_to_index, _true_rank_row
from rankmin.kernels import sweep_chunk_numba, sweep_chunk_numpy
from rankmin.solver import alloc_matrix

CASES = [
    ("N=4 M=3 q=1,1,2", Instance(4, (1, 1, 2))),
    ("N=5 M=3 q=2,2,1", Instance(5, (2, 2, 1))),
    ("N=6 M=3 q=2,2,2", Instance(6, (2, 2, 2))),
    ("N=4 M=4 q=1,1,1,1", Instance(4, (1, 1, 1, 1))),
]


def sweep_workload(inst: Instance):
    m = inst.n_objects
    truth = Preference(tuple(range(1, m + 1)))
    _, perm_ranks = _perm_tables(m)
    codes = perm_ranks.shape[0] ** (inst.n_agents - 1)
    args = (
        alloc_matrix(inst),
        perm_ranks,
        0,
        _pref_to_index(truth),
        _true_rank_row(truth),
        np.arange(1, inst.n_agents, dtype=np.int64),
        0,
        codes,
        True,
    )
    return args, codes


def timed(fn, args, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return result, best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if sweep_chunk_numba is None:
        print("numba backend unavailable (RANKMIN_NUMBA=0 or numba missing); "
              "benchmarking requires both backends")
        return 1

    # warm the JIT outside the timed region
    warm_args, _ = sweep_workload(CASES[0][1])
    sweep_chunk_numba(*warm_args)

    print(f"{'case':24} {'profiles':>9} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for label, inst in CASES:
        sweep_args, codes = sweep_workload(inst)
        res_np, t_np = timed(sweep_chunk_numpy, sweep_args, args.repeats)
        res_nb, t_nb = timed(sweep_chunk_numba, sweep_args, args.repeats)
        assert res_np == res_nb, f"backend mismatch on {label}: {res_np} vs {res_nb}"
        print(
            f"{label:24} {codes:>9} {t_np:>9.4f}s {t_nb:>9.4f}s "
            f"{t_np / t_nb:>7.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
