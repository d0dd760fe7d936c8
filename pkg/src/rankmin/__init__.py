"""Rank-minimizing assignment with an exhaustive obvious-manipulability auditor."""

from .model import (
    DEFAULT_EXHAUSTIVE_LIMIT,
    Allocation,
    ExhaustiveLimitError,
    InputError,
    Instance,
    Preference,
    Profile,
    RankTotal,
    SweepBudgetError,
    enumerate_feasible,
    rank,
    rank_total,
)
from .solver import AllocationSet, rho_bar, rho_under, rm_set, solve_min_rank
from .mechanisms import (
    Mechanism,
    PriorityProfile,
    boston,
    deferred_acceptance,
    run_mechanism,
)
from .audit import (
    DEFAULT_SWEEP_BUDGET,
    AuditReport,
    Lemma1Verdict,
    ManipulationCheck,
    audit,
    all_preferences,
    check_manipulation,
    insert_agent,
    k_star,
    sweep_best_case,
    sweep_worst_case,
    unanimous_profile,
    verify_lemma1,
    witness_part_ii,
)

__all__ = [
    "DEFAULT_EXHAUSTIVE_LIMIT",
    "DEFAULT_SWEEP_BUDGET",
    "Allocation",
    "AllocationSet",
    "AuditReport",
    "ExhaustiveLimitError",
    "InputError",
    "Instance",
    "Lemma1Verdict",
    "ManipulationCheck",
    "Mechanism",
    "Preference",
    "PriorityProfile",
    "Profile",
    "RankTotal",
    "SweepBudgetError",
    "all_preferences",
    "audit",
    "boston",
    "check_manipulation",
    "deferred_acceptance",
    "enumerate_feasible",
    "insert_agent",
    "k_star",
    "rank",
    "rank_total",
    "rho_bar",
    "rho_under",
    "rm_set",
    "run_mechanism",
    "solve_min_rank",
    "sweep_best_case",
    "sweep_worst_case",
    "unanimous_profile",
    "verify_lemma1",
    "witness_part_ii",
]

__version__ = "0.1.0"
