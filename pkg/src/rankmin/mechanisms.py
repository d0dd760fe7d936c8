"""Comparator mechanisms behind a common set-valued interface.

Boston (immediate acceptance) and agent-proposing deferred acceptance are
the audit controls: Boston is the classic obviously-manipulable mechanism,
agent-proposing DA is strategyproof and should never be flagged.  Both are
deterministic given an explicit priority ordering per object and always
return singleton allocation sets; the rank-minimizing mechanism returns its
full optimal set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Allocation,
    InputError,
    Instance,
    Profile,
    rank_total,
    validate_profile,
)
from .solver import AllocationSet, rm_set

MECHANISM_NAMES = ("rm", "boston", "da")


@dataclass(frozen=True)
class PriorityProfile:
    """Per object: a strict ordering of all agents, highest priority first."""

    orderings: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "orderings", tuple(tuple(int(a) for a in o) for o in self.orderings)
        )
        if not self.orderings:
            raise InputError("need a priority ordering per object")
        n = len(self.orderings[0])
        for o, ordering in enumerate(self.orderings):
            if sorted(ordering) != list(range(1, n + 1)):
                raise InputError(
                    f"priority ordering for object {o + 1} is not a permutation "
                    f"of agents 1..{n}"
                )

    @property
    def n_agents(self) -> int:
        return len(self.orderings[0])

    @property
    def n_objects(self) -> int:
        return len(self.orderings)


@dataclass(frozen=True)
class Mechanism:
    """Named mechanism variant: rm, boston(priorities), or da(priorities)."""

    name: str
    priorities: PriorityProfile | None = None

    def __post_init__(self):
        if self.name not in MECHANISM_NAMES:
            raise InputError(
                f"unknown mechanism {self.name!r}; expected one of {MECHANISM_NAMES}"
            )
        if self.name == "rm" and self.priorities is not None:
            raise InputError("the rank-minimizing mechanism takes no priorities")
        if self.name != "rm" and self.priorities is None:
            raise InputError(f"mechanism {self.name!r} requires a priority profile")

    @classmethod
    def rm(cls) -> "Mechanism":
        return cls(name="rm")

    @classmethod
    def boston(cls, priorities: PriorityProfile) -> "Mechanism":
        return cls(name="boston", priorities=priorities)

    @classmethod
    def da(cls, priorities: PriorityProfile) -> "Mechanism":
        return cls(name="da", priorities=priorities)


def _check_priorities(instance: Instance, priorities: PriorityProfile) -> None:
    if priorities.n_objects != instance.n_objects:
        raise InputError(
            f"priorities cover {priorities.n_objects} objects, instance has "
            f"{instance.n_objects}"
        )
    if priorities.n_agents != instance.n_agents:
        raise InputError(
            f"priorities rank {priorities.n_agents} agents, instance has "
            f"{instance.n_agents}"
        )


def _priority_pos(priorities: PriorityProfile) -> list[dict[int, int]]:
    return [{a: pos for pos, a in enumerate(ord_)} for ord_ in priorities.orderings]


def _singleton(instance: Instance, profile: Profile, assigned: list[int]) -> AllocationSet:
    alloc = Allocation(tuple(assigned))
    return AllocationSet(
        members=(alloc,), optimal_total=rank_total(instance, profile, alloc)
    )


def boston(
    instance: Instance, profile: Profile, priorities: PriorityProfile
) -> AllocationSet:
    """Immediate acceptance: round k applies to k-th choices, accepts are final.

    Agents keep descending their full reported list, so with total capacity
    covering all agents everyone is assigned within M rounds.
    """
    validate_profile(instance, profile)
    _check_priorities(instance, priorities)
    n, m = instance.n_agents, instance.n_objects
    pos = _priority_pos(priorities)
    remaining = list(instance.capacities)
    assigned = [0] * n
    unassigned = list(range(n))

    for k in range(m):
        if not unassigned:
            break
        applicants: dict[int, list[int]] = {}
        for i in unassigned:
            o = profile.prefs[i].ranking[k] - 1
            applicants.setdefault(o, []).append(i)
        still = []
        for o, pool in sorted(applicants.items()):
            pool.sort(key=lambda i: pos[o][i + 1])
            take = remaining[o]
            for i in pool[:take]:
                assigned[i] = o + 1
            remaining[o] -= min(take, len(pool))
            still.extend(pool[take:])
        unassigned = sorted(still)

    if unassigned:  # pragma: no cover - impossible when sum(q) >= N
        raise RuntimeError("immediate acceptance left agents unassigned")
    return _singleton(instance, profile, assigned)


def deferred_acceptance(
    instance: Instance, profile: Profile, priorities: PriorityProfile
) -> AllocationSet:
    """Agent-proposing deferred acceptance with tentative holds."""
    validate_profile(instance, profile)
    _check_priorities(instance, priorities)
    n, m = instance.n_agents, instance.n_objects
    pos = _priority_pos(priorities)
    next_choice = [0] * n
    held: list[list[int]] = [[] for _ in range(m)]
    free = list(range(n))

    while free:
        applicants: dict[int, list[int]] = {}
        for i in free:
            if next_choice[i] >= m:  # pragma: no cover - impossible when sum(q) >= N
                raise RuntimeError("agent exhausted its list in deferred acceptance")
            o = profile.prefs[i].ranking[next_choice[i]] - 1
            next_choice[i] += 1
            applicants.setdefault(o, []).append(i)
        free = []
        for o, pool in sorted(applicants.items()):
            pool = held[o] + pool
            pool.sort(key=lambda i: pos[o][i + 1])
            held[o] = pool[: instance.capacities[o]]
            free.extend(pool[instance.capacities[o] :])
        free.sort()

    assigned = [0] * n
    for o, agents in enumerate(held):
        for i in agents:
            assigned[i] = o + 1
    return _singleton(instance, profile, assigned)


def run_mechanism(
    mech: Mechanism,
    instance: Instance,
    profile: Profile,
    limit: int | None = None,
) -> AllocationSet:
    """Uniform dispatch so audit code is mechanism-agnostic."""
    if mech.name == "rm":
        return rm_set(instance, profile, limit)
    if mech.name == "boston":
        return boston(instance, profile, mech.priorities)
    return deferred_acceptance(instance, profile, mech.priorities)
