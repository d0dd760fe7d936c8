"""Hot integer kernels for the optimal-set and sweep loops.

Two interchangeable backends compute bit-identical results:

* numba `@njit` kernels (default when numba imports), and
* a pure-numpy fallback.

Selection is via the ``RANKMIN_NUMBA`` environment variable at import time:
``auto`` (default) uses numba when available, ``0``/``off`` forces the numpy
path, ``1``/``on`` requires numba.  `benchmarks/bench_sweep.py` compares the
two paths.

Data layout (all int64 ndarrays, all indices 0-based here):

* ``alloc``      (K, N): object assigned to each agent, one row per feasible
                 allocation, rows in canonical lexicographic order.
* ``perm_ranks`` (P, M): ``perm_ranks[p, o]`` = 1-based rank of object ``o``
                 under the p-th preference ordering (orderings in
                 lexicographic order).
* a sweep walks opponent-profile codes in ``[code_start, code_stop)``; code
  digits in base P, most significant digit = lowest-indexed opponent, so
  ascending code order is lexicographic order over opponent profiles.
"""

from __future__ import annotations

import os

import numpy as np

_SENTINEL = 1 << 60


def _pick_backend() -> bool:
    flag = os.environ.get("RANKMIN_NUMBA", "auto").strip().lower()
    if flag in ("0", "false", "off", "no"):
        return False
    if flag not in ("auto", "", "1", "true", "on", "yes"):
        raise ValueError(f"unrecognized RANKMIN_NUMBA value: {flag!r}")
    try:
        import numba  # noqa: F401
    except ImportError:
        if flag in ("1", "true", "on", "yes"):
            raise RuntimeError("RANKMIN_NUMBA forces numba but it is not importable")
        return False
    return True


NUMBA_ENABLED = _pick_backend()


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


# -- pure-numpy implementations ---------------------------------------------


def alloc_totals_numpy(alloc: np.ndarray, rank_rows: np.ndarray) -> np.ndarray:
    """Rank total of every allocation row under the given rank rows (N, M)."""
    n = alloc.shape[1]
    return rank_rows[np.arange(n)[None, :], alloc].sum(axis=1)


def sweep_chunk_numpy(
    alloc: np.ndarray,
    perm_ranks: np.ndarray,
    agent_pos: int,
    report_idx: int,
    true_ranks: np.ndarray,
    opp_pos: np.ndarray,
    code_start: int,
    code_stop: int,
    worst: bool,
) -> tuple[int, int]:
    """Extreme rank over one chunk of opponent-profile codes.

    For each code: build the reported rank rows, find the minimum-total
    allocations, and take the agent's max (``worst=True``) or min rank over
    them under ``true_ranks``.  Returns the max/min of that value over the
    chunk together with the smallest code attaining it.
    """
    n = alloc.shape[1]
    p_count, m = perm_ranks.shape
    n_opp = opp_pos.shape[0]
    rows = np.empty((n, m), dtype=np.int64)
    rows[agent_pos, :] = perm_ranks[report_idx, :]
    agent_objs = alloc[:, agent_pos]
    gather_rows = np.arange(n)[None, :]

    best_rho = -1
    best_code = -1
    for code in range(code_start, code_stop):
        c = code
        for j in range(n_opp - 1, -1, -1):
            rows[opp_pos[j], :] = perm_ranks[c % p_count, :]
            c //= p_count
        totals = rows[gather_rows, alloc].sum(axis=1)
        members = totals == totals.min()
        member_ranks = true_ranks[agent_objs[members]]
        rho = int(member_ranks.max() if worst else member_ranks.min())
        if best_code < 0 or ((rho > best_rho) if worst else (rho < best_rho)):
            best_rho = rho
            best_code = code
    return best_rho, best_code


# -- numba implementations ---------------------------------------------------

if NUMBA_ENABLED:
    from numba import njit

    @njit(cache=True)
    def _alloc_totals_jit(alloc, rank_rows):  # pragma: no cover - jitted
        k, n = alloc.shape
        out = np.empty(k, dtype=np.int64)
        for a in range(k):
            t = 0
            for i in range(n):
                t += rank_rows[i, alloc[a, i]]
            out[a] = t
        return out

    @njit(cache=True)
    def _sweep_chunk_jit(
        alloc,
        perm_ranks,
        agent_pos,
        report_idx,
        true_ranks,
        opp_pos,
        code_start,
        code_stop,
        worst,
    ):  # pragma: no cover - jitted
        k, n = alloc.shape
        p_count, m = perm_ranks.shape
        n_opp = opp_pos.shape[0]
        rows = np.empty((n, m), dtype=np.int64)
        rows[agent_pos, :] = perm_ranks[report_idx, :]
        totals = np.empty(k, dtype=np.int64)

        best_rho = np.int64(-1)
        best_code = np.int64(-1)
        for code in range(code_start, code_stop):
            c = code
            for j in range(n_opp - 1, -1, -1):
                rows[opp_pos[j], :] = perm_ranks[c % p_count, :]
                c //= p_count
            min_total = np.int64(_SENTINEL)
            for a in range(k):
                t = np.int64(0)
                for i in range(n):
                    t += rows[i, alloc[a, i]]
                totals[a] = t
                if t < min_total:
                    min_total = t
            rho = np.int64(-1) if worst else np.int64(_SENTINEL)
            for a in range(k):
                if totals[a] == min_total:
                    r = true_ranks[alloc[a, agent_pos]]
                    if worst:
                        if r > rho:
                            rho = r
                    elif r < rho:
                        rho = r
            if best_code < 0 or ((rho > best_rho) if worst else (rho < best_rho)):
                best_rho = rho
                best_code = code
        return best_rho, best_code

    def alloc_totals_numba(alloc, rank_rows):
        return _alloc_totals_jit(alloc, rank_rows)

    def sweep_chunk_numba(
        alloc, perm_ranks, agent_pos, report_idx, true_ranks, opp_pos,
        code_start, code_stop, worst,
    ):
        rho, code = _sweep_chunk_jit(
            alloc, perm_ranks, agent_pos, report_idx, true_ranks, opp_pos,
            code_start, code_stop, worst,
        )
        return int(rho), int(code)

    alloc_totals = alloc_totals_numba
    sweep_chunk = sweep_chunk_numba
else:
    alloc_totals_numba = None
    sweep_chunk_numba = None
    alloc_totals = alloc_totals_numpy
    sweep_chunk = sweep_chunk_numpy
