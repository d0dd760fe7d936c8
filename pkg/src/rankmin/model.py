"""Core domain types and exact rank arithmetic.

Agents and objects are identified by 1-based indices everywhere in the
public API (agent 1..N, object 1..M).  Average ranks are never stored as
floats: comparisons go through the integer rank total, and the exact
average is available as a `fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

#: Enumeration of all feasible allocations is refused above this many agents
#: unless the caller passes an explicit higher limit.
DEFAULT_EXHAUSTIVE_LIMIT = 8


class InputError(ValueError):
    """Invalid domain input (bad index, infeasible allocation, ...)."""


class ExhaustiveLimitError(RuntimeError):
    """Instance too large to enumerate all feasible allocations."""


class SweepBudgetError(RuntimeError):
    """A sweep would exceed the configured mechanism-evaluation budget."""


@dataclass(frozen=True)
class Preference:
    """One agent's strict ranking of all objects, most-preferred first.

    `ranking` must be a permutation of 1..M; `ranking[0]` is the favorite.
    """

    ranking: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "ranking", tuple(int(o) for o in self.ranking))
        m = len(self.ranking)
        if m < 1:
            raise InputError("preference ranking must not be empty")
        if sorted(self.ranking) != list(range(1, m + 1)):
            raise InputError(
                f"ranking {self.ranking} is not a permutation of 1..{m}"
            )

    @property
    def n_objects(self) -> int:
        return len(self.ranking)


@dataclass(frozen=True)
class Instance:
    """Problem size: N agents and per-object capacities q_1..q_M.

    Total capacity must cover all agents (sum(q) >= N); undersized inputs
    are rejected at construction, never repaired.
    """

    n_agents: int
    capacities: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(int(q) for q in self.capacities))
        if self.n_agents < 1:
            raise InputError(f"need at least one agent, got N={self.n_agents}")
        if len(self.capacities) < 1:
            raise InputError("need at least one object")
        if any(q < 1 for q in self.capacities):
            raise InputError(f"capacities must be positive, got {self.capacities}")
        if sum(self.capacities) < self.n_agents:
            raise InputError(
                f"total capacity {sum(self.capacities)} cannot seat "
                f"{self.n_agents} agents"
            )

    @property
    def n_objects(self) -> int:
        return len(self.capacities)


@dataclass(frozen=True)
class Profile:
    """A preference per agent, indexed in agent order (agent i = prefs[i-1])."""

    prefs: tuple[Preference, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefs", tuple(self.prefs))
        if not self.prefs:
            raise InputError("profile must contain at least one preference")
        if not all(isinstance(p, Preference) for p in self.prefs):
            raise InputError("profile entries must be Preference values")
        m = self.prefs[0].n_objects
        if any(p.n_objects != m for p in self.prefs):
            raise InputError("all preferences in a profile must rank the same objects")

    @property
    def n_agents(self) -> int:
        return len(self.prefs)

    @property
    def n_objects(self) -> int:
        return self.prefs[0].n_objects


@dataclass(frozen=True)
class Allocation:
    """Total assignment: assigned[i-1] is the object (1-based) of agent i."""

    assigned: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assigned", tuple(int(o) for o in self.assigned))
        if not self.assigned:
            raise InputError("allocation must assign at least one agent")
        if any(o < 1 for o in self.assigned):
            raise InputError("object indices are 1-based and positive")


@dataclass(frozen=True)
class RankTotal:
    """Sum of assigned ranks over all agents, kept exact.

    The average rank is total/n; callers that need it use `as_fraction()`
    (or render the unreduced `total/n` themselves).  Comparing totals is
    equivalent to comparing averages because n is fixed per instance.
    """

    total: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError("rank total needs a positive agent count")
        if self.total < self.n:
            raise InputError(
                f"total {self.total} below minimum {self.n} (every rank is >= 1)"
            )

    def as_fraction(self) -> Fraction:
        return Fraction(self.total, self.n)


def rank(pref: Preference, o: int) -> int:
    """Position of object `o` in `pref`, 1-based: favorite is 1, last is M."""
    if not 1 <= o <= pref.n_objects:
        raise InputError(f"object index {o} out of range 1..{pref.n_objects}")
    return pref.ranking.index(o) + 1


def validate_profile(instance: Instance, profile: Profile) -> None:
    """Check that a profile fits an instance (agent count and object count)."""
    if profile.n_agents != instance.n_agents:
        raise InputError(
            f"profile has {profile.n_agents} preferences, instance has "
            f"{instance.n_agents} agents"
        )
    if profile.n_objects != instance.n_objects:
        raise InputError(
            f"profile ranks {profile.n_objects} objects, instance has "
            f"{instance.n_objects}"
        )


def validate_allocation(instance: Instance, alloc: Allocation) -> None:
    """Check totality and capacity feasibility of an allocation."""
    if len(alloc.assigned) != instance.n_agents:
        raise InputError(
            f"allocation assigns {len(alloc.assigned)} agents, instance has "
            f"{instance.n_agents}"
        )
    m = instance.n_objects
    counts = [0] * m
    for o in alloc.assigned:
        if not 1 <= o <= m:
            raise InputError(f"object index {o} out of range 1..{m}")
        counts[o - 1] += 1
    for o0, (c, q) in enumerate(zip(counts, instance.capacities)):
        if c > q:
            raise InputError(
                f"object {o0 + 1} assigned to {c} agents, capacity {q}"
            )


def rank_total(instance: Instance, profile: Profile, alloc: Allocation) -> RankTotal:
    """Sum over agents of the rank of their assigned object."""
    validate_profile(instance, profile)
    validate_allocation(instance, alloc)
    total = sum(rank(p, o) for p, o in zip(profile.prefs, alloc.assigned))
    return RankTotal(total=total, n=instance.n_agents)


def enumerate_feasible(
    instance: Instance, limit: int | None = None
) -> Iterator[Allocation]:
    """Yield every capacity-respecting total assignment exactly once.

    Order is lexicographic on the assigned tuple (agent 1 varies slowest),
    which is the canonical allocation order used throughout.  Refuses
    instances with more than `limit` agents (default
    DEFAULT_EXHAUSTIVE_LIMIT) since the count grows like M^N.
    """
    bound = DEFAULT_EXHAUSTIVE_LIMIT if limit is None else limit
    if instance.n_agents > bound:
        raise ExhaustiveLimitError(
            f"exhaustive enumeration is limited to {bound} agents "
            f"(instance has {instance.n_agents}); raise the limit to override"
        )
    return _feasible_iter(instance)


def _feasible_iter(instance: Instance) -> Iterator[Allocation]:
    n, m = instance.n_agents, instance.n_objects
    remaining = list(instance.capacities)
    assigned = [0] * n

    def assign(i: int) -> Iterator[Allocation]:
        if i == n:
            yield Allocation(tuple(assigned))
            return
        for o in range(1, m + 1):
            if remaining[o - 1] == 0:
                continue
            remaining[o - 1] -= 1
            assigned[i] = o
            yield from assign(i + 1)
            remaining[o - 1] += 1

    yield from assign(0)
