"""Command-line interface: solve, enumerate, audit, witness, lemma1.

Instance file format (line-oriented, whitespace-separated, ``#`` comments):

    line 1:       N M
    line 2:       q_1 ... q_M
    next N lines: one ranking per agent, object indices most-preferred first
    optional:     the keyword ``priorities`` followed by M lines, each a
                  full ordering of agents (highest priority first)

Exit codes are a stable contract: 0 = success / no obvious manipulation,
2 = obvious manipulation (or characterization failure) found, 1 = error.
Identical inputs produce byte-identical output for any worker count.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

from .audit import (
    AuditReport,
    ManipulationCheck,
    audit,
    all_preferences,
    insert_agent,
    k_star,
    unanimous_profile,
    verify_lemma1,
    witness_part_ii,
)
from .mechanisms import Mechanism, PriorityProfile
from .model import (
    Allocation,
    InputError,
    Instance,
    Preference,
    Profile,
    rank,
    ExhaustiveLimitError,
    SweepBudgetError,
)
from .solver import rho_bar, rho_under, rm_set, solve_min_rank

CSV_COLUMNS = (
    "agent",
    "true_pref",
    "misreport",
    "worst_truth",
    "worst_misreport",
    "best_truth",
    "best_misreport",
    "violates_i",
    "violates_ii",
)


class ParseError(InputError):
    """Instance file violation, message prefixed with the offending line."""


@dataclass(frozen=True)
class InstanceFile:
    """Parsed contents of an instance file."""

    instance: Instance
    profile: Profile
    priorities: PriorityProfile | None = None


# -- text helpers --------------------------------------------------------------


def format_pref(pref: Preference) -> str:
    return ">".join(str(o) for o in pref.ranking)


def parse_pref_text(text: str) -> Preference:
    sep = ">" if ">" in text else ","
    try:
        return Preference(tuple(int(t) for t in text.split(sep)))
    except ValueError as e:
        raise InputError(f"cannot parse preference {text!r}: {e}") from e


def _parse_ints(text: str, what: str, lineno: int) -> list[int]:
    try:
        return [int(t) for t in text.split()]
    except ValueError:
        raise ParseError(f"line {lineno}: malformed {what}: {text!r}") from None


# -- instance file parsing -----------------------------------------------------


def parse_instance(text: str) -> InstanceFile:
    """Parse and validate an instance file; errors carry line numbers."""
    lines = [
        (i + 1, stripped)
        for i, raw in enumerate(text.splitlines())
        if (stripped := raw.split("#", 1)[0].strip())
    ]
    cursor = 0

    def next_line(what: str) -> tuple[int, str]:
        nonlocal cursor
        if cursor >= len(lines):
            last = lines[-1][0] if lines else 0
            raise ParseError(f"line {last + 1}: missing {what}")
        item = lines[cursor]
        cursor += 1
        return item

    lineno, header = next_line("header line 'N M'")
    fields = _parse_ints(header, "header", lineno)
    if len(fields) != 2:
        raise ParseError(f"line {lineno}: header must be 'N M', got {header!r}")
    n, m = fields

    lineno, caps_text = next_line("capacities line")
    caps = _parse_ints(caps_text, "capacities", lineno)
    if len(caps) != m:
        raise ParseError(
            f"line {lineno}: expected {m} capacities, got {len(caps)}"
        )
    try:
        instance = Instance(n_agents=n, capacities=tuple(caps))
    except InputError as e:
        raise ParseError(f"line {lineno}: {e}") from None

    prefs = []
    for _ in range(n):
        lineno, row = next_line(f"ranking line (need {n} agent rankings)")
        values = _parse_ints(row, "ranking", lineno)
        try:
            pref = Preference(tuple(values))
        except InputError as e:
            raise ParseError(f"line {lineno}: {e}") from None
        if pref.n_objects != m:
            raise ParseError(
                f"line {lineno}: ranking covers {pref.n_objects} objects, "
                f"expected {m}"
            )
        prefs.append(pref)
    profile = Profile(tuple(prefs))

    priorities = None
    if cursor < len(lines):
        lineno, keyword = next_line("")
        if keyword != "priorities":
            raise ParseError(
                f"line {lineno}: expected 'priorities' or end of file, got "
                f"{keyword!r} (wrong agent count?)"
            )
        orderings = []
        for _ in range(m):
            lineno, row = next_line(f"priority line (need {m})")
            values = _parse_ints(row, "priority ordering", lineno)
            if sorted(values) != list(range(1, n + 1)):
                raise ParseError(
                    f"line {lineno}: priority ordering must be a permutation "
                    f"of agents 1..{n}, got {row!r}"
                )
            orderings.append(tuple(values))
        priorities = PriorityProfile(tuple(orderings))
    if cursor < len(lines):
        lineno, extra = lines[cursor]
        raise ParseError(f"line {lineno}: unexpected trailing content {extra!r}")

    return InstanceFile(instance=instance, profile=profile, priorities=priorities)


def render_instance(f: InstanceFile) -> str:
    """Canonical text for an InstanceFile; parse(render(x)) == x."""
    out = [
        f"{f.instance.n_agents} {f.instance.n_objects}",
        " ".join(str(q) for q in f.instance.capacities),
    ]
    out.extend(" ".join(str(o) for o in p.ranking) for p in f.profile.prefs)
    if f.priorities is not None:
        out.append("priorities")
        out.extend(" ".join(str(a) for a in row) for row in f.priorities.orderings)
    return "\n".join(out) + "\n"


# -- report rendering ----------------------------------------------------------


def _check_row(c: ManipulationCheck) -> list[str]:
    return [
        str(c.agent),
        format_pref(c.true_pref),
        format_pref(c.misreport),
        str(c.worst_truth),
        str(c.worst_misreport),
        str(c.best_truth),
        str(c.best_misreport),
        "true" if c.violates_i else "false",
        "true" if c.violates_ii else "false",
    ]


def write_csv_report(report: AuditReport, path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in report.checks:
            writer.writerow(_check_row(c))


def read_csv_report(path: str) -> list[dict]:
    """Parse a CSV report back into typed rows (the test suite's parser)."""
    rows = []
    with open(path, newline="") as f:
        for record in csv.DictReader(f):
            rows.append(
                {
                    "agent": int(record["agent"]),
                    "true_pref": parse_pref_text(record["true_pref"]),
                    "misreport": parse_pref_text(record["misreport"]),
                    "worst_truth": int(record["worst_truth"]),
                    "worst_misreport": int(record["worst_misreport"]),
                    "best_truth": int(record["best_truth"]),
                    "best_misreport": int(record["best_misreport"]),
                    "violates_i": record["violates_i"] == "true",
                    "violates_ii": record["violates_ii"] == "true",
                }
            )
    return rows


def _check_text(c: ManipulationCheck) -> str:
    keys = CSV_COLUMNS
    return " ".join(f"{k}={v}" for k, v in zip(keys, _check_row(c)))


def write_text_report(report: AuditReport, path: str) -> None:
    with open(path, "w") as f:
        f.write(f"mechanism: {report.mechanism}\n")
        f.write(f"instance: {_instance_text(report.instance)}\n")
        for c in report.checks:
            f.write(_check_text(c) + "\n")


def _instance_text(instance: Instance) -> str:
    q = ",".join(str(x) for x in instance.capacities)
    return f"N={instance.n_agents} M={instance.n_objects} q={q}"


# -- subcommands ---------------------------------------------------------------


def _load_file(path: str) -> InstanceFile:
    with open(path) as f:
        return parse_instance(f.read())


def _instance_from_args(args) -> InstanceFile:
    if args.file:
        return _load_file(args.file)
    if args.n is None or args.m is None or args.capacities is None:
        raise InputError("provide --file or all of --n/--m/--capacities")
    caps = tuple(int(t) for t in args.capacities.split(","))
    if len(caps) != args.m:
        raise InputError(f"--capacities lists {len(caps)} objects, --m says {args.m}")
    instance = Instance(n_agents=args.n, capacities=caps)
    # Placeholder unanimous profile: audits and witnesses quantify over
    # preferences themselves and never read it.
    filler = Preference(tuple(range(1, args.m + 1)))
    return InstanceFile(instance=instance, profile=unanimous_profile(filler, args.n))


def _print_allocation_result(instance: Instance, profile: Profile, alloc: Allocation, total: int) -> None:
    n, m = instance.n_agents, instance.n_objects
    ranks = [rank(p, o) for p, o in zip(profile.prefs, alloc.assigned)]
    hist = [ranks.count(r) for r in range(1, m + 1)]
    print("allocation:", " ".join(str(o) for o in alloc.assigned))
    print("total:", total)
    print(f"average: {total}/{n} ({total / n:.4f})")
    print("histogram:", " ".join(str(c) for c in hist))


def cmd_solve(args) -> int:
    f = _load_file(args.file)
    alloc, total = solve_min_rank(f.instance, f.profile)
    _print_allocation_result(f.instance, f.profile, alloc, total.total)
    return 0


def cmd_enumerate(args) -> int:
    f = _load_file(args.file)
    aset = rm_set(f.instance, f.profile)
    total, n = aset.optimal_total.total, aset.optimal_total.n
    print("optimal total:", total)
    print(f"average: {total}/{n} ({total / n:.4f})")
    for member in aset.members:
        print(" ".join(str(o) for o in member.assigned))
    print("set size:", aset.size)
    return 0


def _mechanism_from_args(args, f: InstanceFile) -> Mechanism:
    if args.mechanism == "rm":
        return Mechanism.rm()
    if f.priorities is None:
        raise InputError(
            f"mechanism {args.mechanism!r} needs a priorities section in the "
            f"instance file"
        )
    if args.mechanism == "boston":
        return Mechanism.boston(f.priorities)
    return Mechanism.da(f.priorities)


def cmd_audit(args) -> int:
    f = _instance_from_args(args)
    mech = _mechanism_from_args(args, f)
    scope = "all" if args.agent == "all" else int(args.agent)
    report = audit(
        mech,
        f.instance,
        scope=scope,
        budget=args.budget,
        workers=args.workers,
    )
    violations = [c for c in report.checks if c.violates_i or c.violates_ii]
    print("mechanism:", report.mechanism)
    print("instance:", _instance_text(report.instance))
    print("agents:", "all" if args.agent == "all" else args.agent)
    print("checks:", len(report.checks))
    print("violations:", len(violations))
    for c in violations:
        print("violation:", _check_text(c))
    print("note: exhaustive sweep of this instance only, not a general proof")
    if report.obviously_manipulable:
        print("verdict: obvious manipulation found")
    else:
        print("verdict: no obvious manipulation found")
    if args.report:
        if args.format == "csv":
            write_csv_report(report, args.report)
        else:
            write_text_report(report, args.report)
    return 2 if report.obviously_manipulable else 0


def cmd_witness(args) -> int:
    f = _instance_from_args(args)
    instance = f.instance
    true_pref = parse_pref_text(args.true_pref)
    agent = args.agent
    print("part:", args.part)
    print("agent:", agent)
    print("true preference:", format_pref(true_pref))
    print("k_star:", k_star(true_pref, instance))
    if args.part == "i":
        profile = unanimous_profile(true_pref, instance.n_agents)
    else:
        opponents = witness_part_ii(agent, true_pref, instance)
        profile = insert_agent(opponents, agent, true_pref)
    print("profile:")
    for i, p in enumerate(profile.prefs, start=1):
        print(f"  agent {i}: {format_pref(p)}")
    aset = rm_set(instance, profile)
    print("optimal set size:", aset.size)
    if args.part == "i":
        print("worst-case rank (rho_bar):", rho_bar(agent, true_pref, aset))
    else:
        print("best-case rank (rho_under):", rho_under(agent, true_pref, aset))
    return 0


def cmd_lemma1(args) -> int:
    f = _instance_from_args(args)
    prefs = (
        (parse_pref_text(args.pref),)
        if args.pref
        else all_preferences(f.instance.n_objects)
    )
    failures = 0
    for pref in prefs:
        verdict = verify_lemma1(pref, f.instance)
        if verdict.passed:
            print(
                f"pref {format_pref(pref)}: pass "
                f"(k*={verdict.k_star}, set size {verdict.set_size})"
            )
        else:
            failures += 1
            print(f"pref {format_pref(pref)}: FAIL ({verdict.detail})")
    print("verdict:", "pass" if failures == 0 else f"{failures} failures")
    return 0 if failures == 0 else 2


# -- parser --------------------------------------------------------------------


def _add_instance_source(sub, file_positional: bool = False):
    if file_positional:
        sub.add_argument("file", help="instance file")
        return
    sub.add_argument("--file", help="instance file")
    sub.add_argument("--n", type=int, help="number of agents (generated instance)")
    sub.add_argument("--m", type=int, help="number of objects (generated instance)")
    sub.add_argument("--capacities", help="comma-separated capacities, e.g. 1,1,1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankmin",
        description=(
            "Rank-minimizing assignment solver and exhaustive "
            "obvious-manipulability auditor"
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("solve", help="print one minimum-rank allocation")
    _add_instance_source(p, file_positional=True)
    p.set_defaults(func=cmd_solve)

    p = subs.add_parser("enumerate", help="print the full optimal set")
    _add_instance_source(p, file_positional=True)
    p.set_defaults(func=cmd_enumerate)

    p = subs.add_parser(
        "audit",
        help="exhaustive obvious-manipulation audit (exit 0 clean, 2 found)",
    )
    _add_instance_source(p)
    p.add_argument("--mechanism", choices=["rm", "boston", "da"], default="rm")
    p.add_argument("--agent", default="all", help="agent index or 'all'")
    p.add_argument(
        "--budget",
        type=int,
        default=None,
        help="max mechanism evaluations per audit (default 10^7)",
    )
    p.add_argument("--workers", type=int, default=1, help="sweep worker processes")
    p.add_argument("--report", help="write the full per-check report here")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_audit)

    p = subs.add_parser(
        "witness",
        help="construct and replay a worst-case or best-case witness profile",
    )
    _add_instance_source(p)
    p.add_argument("--part", choices=["i", "ii"], required=True)
    p.add_argument("--true-pref", required=True, help="e.g. 1,2,3 or 1>2>3")
    p.add_argument("--agent", type=int, default=1)
    p.set_defaults(func=cmd_witness)

    p = subs.add_parser(
        "lemma1",
        help=(
            "verify the unanimous-profile characterization of the optimal set "
            "(exit 0 pass, 2 fail)"
        ),
    )
    _add_instance_source(p)
    p.add_argument("--pref", help="check one preference instead of all M!")
    p.set_defaults(func=cmd_lemma1)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        return args.func(args)
    except (InputError, ExhaustiveLimitError, SweepBudgetError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
