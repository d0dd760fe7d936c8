import itertools
from math import factorial

import pytest

from rankmin import Instance, Preference, Profile


def P(*ranking) -> Preference:
    return Preference(tuple(ranking))


def profile_of(*rankings) -> Profile:
    return Profile(tuple(Preference(tuple(r)) for r in rankings))


def brute_allocations(instance: Instance):
    """Independent feasibility enumeration: filter the full M^N product."""
    n, m = instance.n_agents, instance.n_objects
    for assigned in itertools.product(range(1, m + 1), repeat=n):
        counts = [0] * m
        for o in assigned:
            counts[o - 1] += 1
        if all(c <= q for c, q in zip(counts, instance.capacities)):
            yield assigned


def brute_total(profile: Profile, assigned) -> int:
    return sum(p.ranking.index(o) + 1 for p, o in zip(profile.prefs, assigned))


def brute_min_total(instance: Instance, profile: Profile) -> int:
    return min(brute_total(profile, a) for a in brute_allocations(instance))


def multinomial_count(instance: Instance) -> int:
    """Count feasible assignments by summing multinomials over fill vectors."""
    n, m = instance.n_agents, instance.n_objects
    total = 0
    for fills in itertools.product(
        *(range(q + 1) for q in instance.capacities)
    ):
        if sum(fills) != n:
            continue
        ways = factorial(n)
        for c in fills:
            ways //= factorial(c)
        total += ways
    return total


def capacity_family(ns=(2, 3), ms=(2, 3)):
    """Every instance with q_m in 1..N and sum(q) >= N for the given sizes."""
    for n in ns:
        for m in ms:
            for caps in itertools.product(range(1, n + 1), repeat=m):
                if sum(caps) >= n:
                    yield Instance(n_agents=n, capacities=caps)


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Trigger any JIT compilation once, outside timed assertions."""
    import numpy as np

    from rankmin import kernels

    alloc = np.array([[0, 1], [1, 0]], dtype=np.int64)
    ranks = np.array([[1, 2], [2, 1]], dtype=np.int64)
    kernels.alloc_totals(alloc, ranks)
    kernels.sweep_chunk(
        alloc, ranks, 0, 0, np.array([1, 2], dtype=np.int64),
        np.array([1], dtype=np.int64), 0, 2, True,
    )
