"""Minimum-average-rank solving and the full optimal set.

Two backends:

* ``enumeration`` walks every feasible allocation; it is the only way to
  materialize the full optimal set and doubles as the oracle for the other
  backend.  Gated by the exhaustive limit on N.
* ``assignment`` expands objects into unit-capacity slots and solves a
  min-cost bipartite assignment (scipy), so a single optimum stays
  computable past the exhaustive limit.

Both return the lexicographically smallest optimal allocation, so their
outputs are directly comparable wherever both run.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import kernels
from .model import (
    DEFAULT_EXHAUSTIVE_LIMIT,
    Allocation,
    ExhaustiveLimitError,
    InputError,
    Instance,
    Preference,
    Profile,
    RankTotal,
    enumerate_feasible,
    rank,
    validate_profile,
)


@dataclass(frozen=True)
class AllocationSet:
    """All allocations sharing the minimum rank total, in canonical order."""

    members: tuple[Allocation, ...]
    optimal_total: RankTotal

    def __post_init__(self):
        if not self.members:
            raise InputError("allocation set must be non-empty")

    @property
    def size(self) -> int:
        return len(self.members)


@lru_cache(maxsize=256)
def _alloc_matrix_cached(n_agents: int, capacities: tuple[int, ...], bound: int) -> np.ndarray:
    instance = Instance(n_agents=n_agents, capacities=capacities)
    rows = [
        [o - 1 for o in a.assigned]
        for a in enumerate_feasible(instance, limit=bound)
    ]
    mat = np.array(rows, dtype=np.int64)
    mat.setflags(write=False)
    return mat


def alloc_matrix(instance: Instance, limit: int | None = None) -> np.ndarray:
    """(K, N) matrix of all feasible allocations, 0-based objects, lex order."""
    bound = DEFAULT_EXHAUSTIVE_LIMIT if limit is None else limit
    if instance.n_agents > bound:
        raise ExhaustiveLimitError(
            f"exhaustive enumeration is limited to {bound} agents "
            f"(instance has {instance.n_agents}); raise the limit to override"
        )
    return _alloc_matrix_cached(instance.n_agents, instance.capacities, bound)


def rank_rows(profile: Profile) -> np.ndarray:
    """(N, M) matrix with rank_rows[i, o] = rank of 0-based object o for agent i."""
    n, m = profile.n_agents, profile.n_objects
    rows = np.empty((n, m), dtype=np.int64)
    for i, pref in enumerate(profile.prefs):
        for pos, o in enumerate(pref.ranking):
            rows[i, o - 1] = pos + 1
    return rows


def rm_set(
    instance: Instance, profile: Profile, limit: int | None = None
) -> AllocationSet:
    """The full set of rank-minimizing allocations for a reported profile."""
    validate_profile(instance, profile)
    mat = alloc_matrix(instance, limit)
    totals = kernels.alloc_totals(mat, rank_rows(profile))
    best = int(totals.min())
    members = tuple(
        Allocation(tuple(int(o) + 1 for o in row)) for row in mat[totals == best]
    )
    return AllocationSet(
        members=members, optimal_total=RankTotal(total=best, n=instance.n_agents)
    )


def solve_min_rank(
    instance: Instance,
    profile: Profile,
    backend: str = "auto",
    limit: int | None = None,
) -> tuple[Allocation, RankTotal]:
    """One minimum-rank allocation plus its total.

    Deterministic: always the lexicographically smallest optimum.  With
    ``backend="auto"`` enumeration is used inside the exhaustive limit and
    the assignment solver beyond it.
    """
    validate_profile(instance, profile)
    if backend not in ("auto", "enumeration", "assignment"):
        raise InputError(f"unknown backend {backend!r}")
    if backend == "auto":
        bound = DEFAULT_EXHAUSTIVE_LIMIT if limit is None else limit
        backend = "enumeration" if instance.n_agents <= bound else "assignment"
    if backend == "enumeration":
        aset = rm_set(instance, profile, limit)
        return aset.members[0], aset.optimal_total
    alloc, total = _solve_assignment(instance, profile)
    return alloc, RankTotal(total=total, n=instance.n_agents)


def _assignment_total(cost: np.ndarray) -> int:
    if cost.shape[0] == 0:
        return 0
    rows, cols = linear_sum_assignment(cost)
    return int(cost[rows, cols].sum())


def _solve_assignment(instance: Instance, profile: Profile) -> tuple[Allocation, int]:
    n, m = instance.n_agents, instance.n_objects
    r = rank_rows(profile)
    # Object m contributes q_m unit-capacity slot columns.
    slots = np.repeat(np.arange(m), instance.capacities)
    total = _assignment_total(r[:, slots])

    # Lexicographic canonicalization: fix each agent in turn to the smallest
    # object whose choice keeps the remaining problem at the optimal value.
    remaining = list(instance.capacities)
    assigned: list[int] = []
    target = total
    for i in range(n):
        for o in range(m):
            if remaining[o] == 0:
                continue
            remaining[o] -= 1
            slots_left = np.repeat(np.arange(m), remaining)
            cand = int(r[i, o]) + _assignment_total(r[i + 1 :, :][:, slots_left])
            if cand == target:
                assigned.append(o + 1)
                target -= int(r[i, o])
                break
            remaining[o] += 1
        else:  # pragma: no cover - defensive; some object always fits
            raise RuntimeError("no consistent object found during canonicalization")
    return Allocation(tuple(assigned)), total


def rho_bar(agent: int, true_pref: Preference, aset: AllocationSet) -> int:
    """Rank of the agent's worst assignment across the set, under true_pref.

    ``agent`` is 1-based.  ``true_pref`` may differ from whatever the agent
    reported in the profile that produced the set; that is exactly what
    misreport evaluation needs.
    """
    _check_agent(agent, aset)
    return max(rank(true_pref, m.assigned[agent - 1]) for m in aset.members)


def rho_under(agent: int, true_pref: Preference, aset: AllocationSet) -> int:
    """Rank of the agent's best assignment across the set, under true_pref."""
    _check_agent(agent, aset)
    return min(rank(true_pref, m.assigned[agent - 1]) for m in aset.members)


def _check_agent(agent: int, aset: AllocationSet) -> None:
    n = len(aset.members[0].assigned)
    if not 1 <= agent <= n:
        raise InputError(f"agent index {agent} out of range 1..{n}")
