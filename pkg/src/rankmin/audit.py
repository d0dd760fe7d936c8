"""Exhaustive obvious-manipulability auditing.

A misreport is an *obvious manipulation* when its worst-case rank (over all
opponent profiles) beats truth-telling's worst case, or its best-case rank
beats truth-telling's best case.  The auditor decides this by sweeping the
full strict preference domain of the opponents; there is no sampling, a
sweep either runs exhaustively or is refused on budget.  Outcome ranks are
always evaluated under the agent's TRUE preference while the mechanism runs
on the REPORTED one.

Every sweep result is per-instance evidence: "no obvious manipulation" here
certifies the swept instance, not the mechanism in general.

Companion constructions used by the checks and the `witness` CLI command:

* `k_star`: the critical index of a preference (smallest k whose top-k
  objects can seat all agents).  Under truthful reporting the rank-minimizing
  mechanism's worst case equals it.
* `unanimous_profile`: everyone reports the same list; realizes that worst
  case.
* `witness_part_ii`: opponents arranged so first choices exactly fill
  capacities; realizes a best case of 1.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from . import kernels
from .mechanisms import Mechanism, run_mechanism
from .model import (
    InputError,
    Instance,
    Preference,
    Profile,
    SweepBudgetError,
)
from .solver import alloc_matrix, rho_bar, rho_under, rm_set

DEFAULT_SWEEP_BUDGET = 10_000_000

#: Below this many opponent profiles a sweep is not worth splitting further.
_MIN_CODES_PER_CHUNK = 16

OpponentProfile = tuple[Preference, ...]


# -- critical index and witness constructions --------------------------------


def k_star(true_pref: Preference, instance: Instance) -> int:
    """Smallest k such that the top-k objects of the preference seat N agents."""
    if true_pref.n_objects != instance.n_objects:
        raise InputError(
            f"preference ranks {true_pref.n_objects} objects, instance has "
            f"{instance.n_objects}"
        )
    seats = 0
    for k, o in enumerate(true_pref.ranking, start=1):
        seats += instance.capacities[o - 1]
        if seats >= instance.n_agents:
            return k
    raise AssertionError("unreachable: instances guarantee sum(q) >= N")


def unanimous_profile(pref: Preference, n: int) -> Profile:
    """Profile in which all n agents report the same preference."""
    if n < 1:
        raise InputError(f"need at least one agent, got {n}")
    return Profile((pref,) * n)


def witness_part_ii(
    agent: int, true_pref: Preference, instance: Instance
) -> OpponentProfile:
    """Opponent profile under which truth-telling realizes a best case of 1.

    First choices are spread so each object receives exactly as many
    first-rankers as it can seat (walking the agent's list, the agent itself
    taking one seat at its own favorite).  The unique rank-minimizing
    allocation then gives every agent, this one included, its first choice.
    Positions past the first are a deterministic rotation of ``true_pref``.
    """
    n = instance.n_agents
    _check_agent_index(agent, n)
    if true_pref.n_objects != instance.n_objects:
        raise InputError("preference and instance disagree on object count")
    ranking = true_pref.ranking
    opponents: list[Preference] = []
    need = n
    for pos, o in enumerate(ranking):
        if need == 0:
            break
        group = min(instance.capacities[o - 1], need)
        need -= group
        if pos == 0:
            group -= 1  # the audited agent itself first-ranks ranking[0]
        rotated = Preference(ranking[pos:] + ranking[:pos])
        opponents.extend([rotated] * group)
    return tuple(opponents)


def insert_agent(opponents: OpponentProfile, agent: int, pref: Preference) -> Profile:
    """Full profile with `pref` at 1-based position `agent` among opponents."""
    prefs = list(opponents)
    if not 1 <= agent <= len(prefs) + 1:
        raise InputError(
            f"agent index {agent} out of range 1..{len(prefs) + 1}"
        )
    prefs.insert(agent - 1, pref)
    return Profile(tuple(prefs))


# -- unanimous-profile characterization of the optimal set --------------------


@dataclass(frozen=True)
class Lemma1Verdict:
    """Result of checking the optimal set under a unanimous profile."""

    passed: bool
    k_star: int
    set_size: int
    detail: str = ""


def verify_lemma1(
    pref: Preference, instance: Instance, limit: int | None = None
) -> Lemma1Verdict:
    """Check the fill-to-capacity shape of the optimal set under unanimity.

    Builds the unanimous profile for `pref` and verifies that the optimal
    set is exactly the allocations that (I) fill each of the top k*-1
    objects to capacity and (II) put all remaining agents on the k*-th
    object, and that every top-k* object is reachable by every agent inside
    the set.  Returns a verdict with a counterexample description on fail.
    """
    n = instance.n_agents
    ks = k_star(pref, instance)
    aset = rm_set(instance, unanimous_profile(pref, n), limit)
    top = pref.ranking[:ks]
    fill = {o: instance.capacities[o - 1] for o in top[:-1]}
    critical = top[-1]
    critical_fill = n - sum(fill.values())

    def shape_ok(assigned: tuple[int, ...]) -> bool:
        counts: dict[int, int] = {}
        for o in assigned:
            counts[o] = counts.get(o, 0) + 1
        if any(counts.get(o, 0) != q for o, q in fill.items()):
            return False
        return counts.get(critical, 0) == critical_fill

    def fail(detail: str) -> Lemma1Verdict:
        return Lemma1Verdict(False, ks, aset.size, detail)

    for member in aset.members:
        if not shape_ok(member.assigned):
            return fail(
                f"optimal allocation {member.assigned} does not fill the top "
                f"{ks} objects as required"
            )

    member_keys = {m.assigned for m in aset.members}
    mat = alloc_matrix(instance, limit)
    for row in mat:
        assigned = tuple(int(o) + 1 for o in row)
        if assigned not in member_keys and shape_ok(assigned):
            return fail(
                f"allocation {assigned} satisfies the fill conditions but is "
                f"not optimal"
            )

    for o in top:
        for i in range(n):
            if not any(m.assigned[i] == o for m in aset.members):
                return fail(
                    f"agent {i + 1} never receives object {o} in the optimal set"
                )

    return Lemma1Verdict(True, ks, aset.size)


# -- exhaustive sweeps over opponent profiles ---------------------------------


@lru_cache(maxsize=16)
def _perm_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    """All M! orderings (lex order) and their object->rank lookup, 0-based."""
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.int64)
    perm_ranks = np.empty_like(perms)
    p = perms.shape[0]
    perm_ranks[np.arange(p)[:, None], perms] = np.arange(1, m + 1)[None, :]
    perms.setflags(write=False)
    perm_ranks.setflags(write=False)
    return perms, perm_ranks


@lru_cache(maxsize=16)
def _perm_index_map(m: int) -> dict[tuple[int, ...], int]:
    perms, _ = _perm_tables(m)
    return {tuple(int(x) for x in row): i for i, row in enumerate(perms)}


def _pref_to_index(pref: Preference) -> int:
    return _perm_index_map(pref.n_objects)[tuple(o - 1 for o in pref.ranking)]


def _index_to_pref(idx: int, m: int) -> Preference:
    perms, _ = _perm_tables(m)
    return Preference(tuple(int(o) + 1 for o in perms[idx]))


def all_preferences(m: int) -> tuple[Preference, ...]:
    """Every strict preference over m objects, in lexicographic order."""
    perms, _ = _perm_tables(m)
    return tuple(Preference(tuple(int(o) + 1 for o in row)) for row in perms)


def _true_rank_row(pref: Preference) -> np.ndarray:
    row = np.empty(pref.n_objects, dtype=np.int64)
    for pos, o in enumerate(pref.ranking):
        row[o - 1] = pos + 1
    return row


def _decode_opponents(code: int, p_count: int, n_opp: int, m: int) -> OpponentProfile:
    digits = []
    for _ in range(n_opp):
        digits.append(code % p_count)
        code //= p_count
    return tuple(_index_to_pref(d, m) for d in reversed(digits))


def _chunk_bounds(codes: int, workers: int) -> list[tuple[int, int]]:
    if workers <= 1 or codes <= 1:
        return [(0, codes)]
    n_chunks = min(workers, codes, max(2, codes // _MIN_CODES_PER_CHUNK))
    step, extra = divmod(codes, n_chunks)
    bounds = []
    lo = 0
    for c in range(n_chunks):
        hi = lo + step + (1 if c < extra else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def _sweep_chunk_task(args) -> tuple[int, int]:
    return kernels.sweep_chunk(*args)


def _sweep_rm(
    instance: Instance,
    agent: int,
    true_pref: Preference,
    report: Preference,
    worst: bool,
    workers: int,
    limit: int | None,
    executor: ProcessPoolExecutor | None,
) -> tuple[int, OpponentProfile]:
    n, m = instance.n_agents, instance.n_objects
    mat = alloc_matrix(instance, limit)
    _, perm_ranks = _perm_tables(m)
    p_count = perm_ranks.shape[0]
    codes = p_count ** (n - 1)
    opp_pos = np.array([i for i in range(n) if i != agent - 1], dtype=np.int64)
    args = (
        mat,
        perm_ranks,
        agent - 1,
        _pref_to_index(report),
        _true_rank_row(true_pref),
        opp_pos,
    )

    bounds = _chunk_bounds(codes, workers)
    if executor is None or len(bounds) == 1:
        results = [kernels.sweep_chunk(*args, lo, hi, worst) for lo, hi in bounds]
    else:
        results = list(
            executor.map(_sweep_chunk_task, [args + (lo, hi, worst) for lo, hi in bounds])
        )

    # Chunks come back in ascending code order; strict improvement keeps the
    # lexicographically smallest witness on ties.
    best_rho, best_code = results[0]
    for rho, code in results[1:]:
        if (rho > best_rho) if worst else (rho < best_rho):
            best_rho, best_code = rho, code
    return best_rho, _decode_opponents(best_code, p_count, n - 1, m)


def _sweep_generic(
    mech: Mechanism,
    instance: Instance,
    agent: int,
    true_pref: Preference,
    report: Preference,
    worst: bool,
    limit: int | None,
) -> tuple[int, OpponentProfile]:
    prefs = all_preferences(instance.n_objects)
    best_v: int | None = None
    best_opp: OpponentProfile = ()
    for combo in itertools.product(prefs, repeat=instance.n_agents - 1):
        profile = insert_agent(combo, agent, report)
        aset = run_mechanism(mech, instance, profile, limit)
        v = rho_bar(agent, true_pref, aset) if worst else rho_under(agent, true_pref, aset)
        if best_v is None or (v > best_v if worst else v < best_v):
            best_v, best_opp = v, combo
    assert best_v is not None
    return best_v, best_opp


def _check_agent_index(agent: int, n: int) -> None:
    if not 1 <= agent <= n:
        raise InputError(f"agent index {agent} out of range 1..{n}")


def _sweep(
    mech: Mechanism,
    agent: int,
    true_pref: Preference,
    report: Preference,
    instance: Instance,
    worst: bool,
    budget: int | None,
    workers: int,
    limit: int | None,
    executor: ProcessPoolExecutor | None = None,
) -> tuple[int, OpponentProfile]:
    n, m = instance.n_agents, instance.n_objects
    _check_agent_index(agent, n)
    for p in (true_pref, report):
        if p.n_objects != m:
            raise InputError("preference and instance disagree on object count")
    codes = factorial(m) ** (n - 1)
    bound = DEFAULT_SWEEP_BUDGET if budget is None else budget
    if codes > bound:
        raise SweepBudgetError(
            f"sweep requires {codes} mechanism evaluations, above the budget "
            f"of {bound}"
        )
    if mech.name == "rm":
        return _sweep_rm(
            instance, agent, true_pref, report, worst, workers, limit, executor
        )
    return _sweep_generic(mech, instance, agent, true_pref, report, worst, limit)


def sweep_worst_case(
    mech: Mechanism,
    agent: int,
    true_pref: Preference,
    report: Preference,
    instance: Instance,
    budget: int | None = None,
    workers: int = 1,
    limit: int | None = None,
) -> tuple[int, OpponentProfile]:
    """Max over ALL opponent profiles of the agent's worst rank in the output set.

    The mechanism runs with `report` inserted at the agent's position; the
    rank is evaluated under `true_pref`.  Returns the maximum and the
    lexicographically smallest opponent profile attaining it.  Worker
    parallelism (over opponent profiles) applies to the rank-minimizing
    mechanism's sweeps; results are identical for any worker count.
    """
    return _run_sweep_with_pool(
        mech, agent, true_pref, report, instance, True, budget, workers, limit
    )


def sweep_best_case(
    mech: Mechanism,
    agent: int,
    true_pref: Preference,
    report: Preference,
    instance: Instance,
    budget: int | None = None,
    workers: int = 1,
    limit: int | None = None,
) -> tuple[int, OpponentProfile]:
    """Min over ALL opponent profiles of the agent's best rank in the output set."""
    return _run_sweep_with_pool(
        mech, agent, true_pref, report, instance, False, budget, workers, limit
    )


def _run_sweep_with_pool(
    mech, agent, true_pref, report, instance, worst, budget, workers, limit
) -> tuple[int, OpponentProfile]:
    if workers > 1 and mech.name == "rm":
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return _sweep(
                mech, agent, true_pref, report, instance, worst, budget, workers,
                limit, executor,
            )
    return _sweep(mech, agent, true_pref, report, instance, worst, budget, workers, limit)


# -- manipulation checks and full audits --------------------------------------


@dataclass(frozen=True)
class ManipulationCheck:
    """Worst/best-case comparison of one (true type, misreport) pair.

    `witness_i` is an opponent profile for which TRUTH-telling realizes
    `worst_truth`; `witness_ii` one for which the MISREPORT realizes
    `best_misreport`.  Each is present exactly when its flag is set and
    replays through `run_mechanism` to the recorded rank.
    """

    agent: int
    true_pref: Preference
    misreport: Preference
    worst_truth: int
    worst_misreport: int
    best_truth: int
    best_misreport: int
    violates_i: bool
    violates_ii: bool
    witness_i: OpponentProfile | None
    witness_ii: OpponentProfile | None


@dataclass(frozen=True)
class AuditReport:
    """All manipulation checks for an instance, plus the summary flag."""

    mechanism: str
    instance: Instance
    agents: tuple[int, ...]
    checks: tuple[ManipulationCheck, ...]
    obviously_manipulable: bool


def _build_check(
    agent: int,
    true_pref: Preference,
    misreport: Preference,
    worst_truth: tuple[int, OpponentProfile],
    worst_mis: tuple[int, OpponentProfile],
    best_truth: tuple[int, OpponentProfile],
    best_mis: tuple[int, OpponentProfile],
) -> ManipulationCheck:
    violates_i = worst_truth[0] > worst_mis[0]
    violates_ii = best_truth[0] > best_mis[0]
    return ManipulationCheck(
        agent=agent,
        true_pref=true_pref,
        misreport=misreport,
        worst_truth=worst_truth[0],
        worst_misreport=worst_mis[0],
        best_truth=best_truth[0],
        best_misreport=best_mis[0],
        violates_i=violates_i,
        violates_ii=violates_ii,
        witness_i=worst_truth[1] if violates_i else None,
        witness_ii=best_mis[1] if violates_ii else None,
    )


def check_manipulation(
    mech: Mechanism,
    agent: int,
    true_pref: Preference,
    misreport: Preference,
    instance: Instance,
    budget: int | None = None,
    workers: int = 1,
    limit: int | None = None,
) -> ManipulationCheck:
    """Decide whether `misreport` is an obvious manipulation for this type."""
    if misreport == true_pref:
        raise InputError("misreport must differ from the true preference")
    wt = sweep_worst_case(mech, agent, true_pref, true_pref, instance, budget, workers, limit)
    wm = sweep_worst_case(mech, agent, true_pref, misreport, instance, budget, workers, limit)
    bt = sweep_best_case(mech, agent, true_pref, true_pref, instance, budget, workers, limit)
    bm = sweep_best_case(mech, agent, true_pref, misreport, instance, budget, workers, limit)
    return _build_check(agent, true_pref, misreport, wt, wm, bt, bm)


def audit(
    mech: Mechanism,
    instance: Instance,
    scope: int | str = "all",
    budget: int | None = None,
    workers: int = 1,
    limit: int | None = None,
) -> AuditReport:
    """Run every (true type, misreport) check for the agents in scope.

    Checks are ordered by agent, then true type, then misreport, all in
    lexicographic preference order; truth sweeps are shared across the
    misreports of a type.  Refuses (naming the exact evaluation count) when
    the planned sweep volume exceeds the budget.
    """
    n, m = instance.n_agents, instance.n_objects
    if scope == "all":
        agents = tuple(range(1, n + 1))
    else:
        _check_agent_index(int(scope), n)
        agents = (int(scope),)

    p_count = factorial(m)
    planned = 2 * len(agents) * p_count**2 * p_count ** (n - 1)
    bound = DEFAULT_SWEEP_BUDGET if budget is None else budget
    if planned > bound:
        raise SweepBudgetError(
            f"audit requires {planned} mechanism evaluations, above the "
            f"budget of {bound}"
        )

    prefs = all_preferences(m)
    executor: ProcessPoolExecutor | None = None
    if workers > 1 and mech.name == "rm":
        executor = ProcessPoolExecutor(max_workers=workers)
    try:
        checks: list[ManipulationCheck] = []
        for agent in agents:
            for truth in prefs:
                wt = _sweep(mech, agent, truth, truth, instance, True, budget, workers, limit, executor)
                bt = _sweep(mech, agent, truth, truth, instance, False, budget, workers, limit, executor)
                for mis in prefs:
                    if mis == truth:
                        continue
                    wm = _sweep(mech, agent, truth, mis, instance, True, budget, workers, limit, executor)
                    bm = _sweep(mech, agent, truth, mis, instance, False, budget, workers, limit, executor)
                    checks.append(_build_check(agent, truth, mis, wt, wm, bt, bm))
    finally:
        if executor is not None:
            executor.shutdown()

    return AuditReport(
        mechanism=mech.name,
        instance=instance,
        agents=agents,
        checks=tuple(checks),
        obviously_manipulable=any(c.violates_i or c.violates_ii for c in checks),
    )
