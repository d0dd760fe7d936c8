import pytest

from rankmin import Instance, PriorityProfile
from rankmin.cli import (
    ParseError,
    format_pref,
    main,
    parse_instance,
    parse_pref_text,
    read_csv_report,
    render_instance,
    write_csv_report,
)
from rankmin import audit, Mechanism

from conftest import P, profile_of

UNANIMOUS_3 = "3 3\n1 1 1\n1 2 3\n1 2 3\n1 2 3\n"
BOSTON_CONTROL = (
    "3 3\n1 1 1\n1 2 3\n1 2 3\n2 1 3\n"
    "priorities\n2 3 1\n1 2 3\n2 3 1\n"
)


@pytest.fixture
def control_file(tmp_path):
    path = tmp_path / "boston_control.txt"
    path.write_text(BOSTON_CONTROL)
    return str(path)


class TestParse:
    def test_basic_example(self):
        f = parse_instance("2 2\n1 1\n1 2\n2 1\n")
        assert f.instance == Instance(2, (1, 1))
        assert f.profile == profile_of([1, 2], [2, 1])
        assert f.priorities is None

    def test_comments_and_blanks(self):
        text = "# two agents\n\n2 2  # N M\n1 1\n1 2\n2 1\n"
        assert parse_instance(text).instance == Instance(2, (1, 1))

    def test_priorities_section(self):
        f = parse_instance(BOSTON_CONTROL)
        assert f.priorities == PriorityProfile(((2, 3, 1), (1, 2, 3), (2, 3, 1)))

    def test_round_trip(self):
        for text in ("2 2\n1 1\n1 2\n2 1\n", BOSTON_CONTROL, UNANIMOUS_3):
            f = parse_instance(text)
            assert parse_instance(render_instance(f)) == f

    def test_undersized_capacity_has_line_number(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_instance("3 2\n1 1\n1 2\n1 2\n1 2\n")

    def test_non_permutation_ranking(self):
        with pytest.raises(ParseError, match="line 3"):
            parse_instance("2 2\n1 1\n1 1\n2 1\n")

    def test_malformed_tokens(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_instance("2 2\none one\n1 2\n2 1\n")

    def test_wrong_agent_count(self):
        with pytest.raises(ParseError, match="line 4"):
            parse_instance("3 2\n2 1\n1 2\npriorities\n")

    def test_missing_rankings(self):
        with pytest.raises(ParseError, match="missing"):
            parse_instance("2 2\n1 1\n1 2\n")

    def test_wrong_capacity_count(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_instance("2 3\n1 1\n1 2 3\n1 2 3\n")

    def test_trailing_content(self):
        with pytest.raises(ParseError, match="line 5"):
            parse_instance("2 2\n1 1\n1 2\n2 1\n1 2\n")

    def test_priorities_must_cover_agents(self):
        with pytest.raises(ParseError, match="line 6"):
            parse_instance("2 2\n1 1\n1 2\n2 1\npriorities\n1 2 3\n1 2\n")

    def test_pref_text_forms(self):
        assert parse_pref_text("1,2,3") == P(1, 2, 3)
        assert parse_pref_text("3>1>2") == P(3, 1, 2)
        assert format_pref(P(2, 1)) == "2>1"


class TestSolveCommand:
    def test_unanimous_output(self, tmp_path, capsys):
        path = tmp_path / "inst.txt"
        path.write_text(UNANIMOUS_3)
        assert main(["solve", str(path)]) == 0
        out = capsys.readouterr().out
        assert "allocation: 1 2 3" in out
        assert "average: 6/3 (2.0000)" in out
        assert "histogram: 1 1 1" in out

    def test_distinct_first_choices(self, tmp_path, capsys):
        path = tmp_path / "inst.txt"
        path.write_text("3 3\n1 1 1\n1 2 3\n2 3 1\n3 1 2\n")
        assert main(["solve", str(path)]) == 0
        out = capsys.readouterr().out
        assert "average: 3/3 (1.0000)" in out
        assert "histogram: 3 0 0" in out

    def test_two_agent_average_is_unreduced(self, tmp_path, capsys):
        path = tmp_path / "inst.txt"
        path.write_text("2 2\n1 1\n1 2\n1 2\n")
        assert main(["solve", str(path)]) == 0
        assert "average: 3/2 (1.5000)" in capsys.readouterr().out

    def test_missing_file_is_an_error(self, capsys):
        assert main(["solve", "/nonexistent/inst.txt"]) == 1
        assert "error:" in capsys.readouterr().err


class TestEnumerateCommand:
    def test_set_sizes(self, tmp_path, capsys):
        cases = [
            (UNANIMOUS_3, 6),
            ("3 3\n1 1 1\n1 2 3\n2 3 1\n3 1 2\n", 1),
            ("2 2\n1 1\n1 2\n1 2\n", 2),
        ]
        for text, size in cases:
            path = tmp_path / "inst.txt"
            path.write_text(text)
            assert main(["enumerate", str(path)]) == 0
            out = capsys.readouterr().out
            assert f"set size: {size}" in out

    def test_members_in_canonical_order(self, tmp_path, capsys):
        path = tmp_path / "inst.txt"
        path.write_text("2 2\n1 1\n1 2\n1 2\n")
        main(["enumerate", str(path)])
        out = capsys.readouterr().out
        assert out.index("1 2") < out.index("2 1")

    def test_exhaustive_limit_exits_one(self, tmp_path, capsys):
        rankings = "".join("1 2\n" for _ in range(9))
        path = tmp_path / "big.txt"
        path.write_text(f"9 2\n9 9\n{rankings}")
        assert main(["enumerate", str(path)]) == 1
        assert "limited to 8 agents" in capsys.readouterr().err


class TestAuditCommand:
    def test_rm_generated_instance_clean(self, capsys):
        rc = main(
            ["audit", "--mechanism", "rm", "--n", "3", "--m", "3",
             "--capacities", "1,1,1"]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "violations: 0" in out
        assert "not a general proof" in out

    def test_boston_control_exits_two(self, control_file, capsys):
        rc = main(["audit", "--mechanism", "boston", "--file", control_file])
        assert rc == 2
        assert "obvious manipulation found" in capsys.readouterr().out

    def test_da_control_exits_zero(self, control_file):
        assert main(["audit", "--mechanism", "da", "--file", control_file]) == 0

    def test_boston_needs_priorities(self, tmp_path, capsys):
        path = tmp_path / "noprio.txt"
        path.write_text(UNANIMOUS_3)
        assert main(["audit", "--mechanism", "boston", "--file", str(path)]) == 1
        assert "priorities" in capsys.readouterr().err

    def test_budget_error_exits_one(self, capsys):
        rc = main(
            ["audit", "--mechanism", "rm", "--n", "3", "--m", "3",
             "--capacities", "1,1,1", "--budget", "10"]
        )
        assert rc == 1
        assert "budget" in capsys.readouterr().err

    def test_csv_report_round_trips(self, tmp_path, capsys):
        report_path = tmp_path / "report.csv"
        main(
            ["audit", "--mechanism", "rm", "--n", "2", "--m", "2",
             "--capacities", "1,1", "--report", str(report_path), "--format", "csv"]
        )
        capsys.readouterr()
        rows = read_csv_report(str(report_path))
        lib_report = audit(Mechanism.rm(), Instance(2, (1, 1)))
        assert len(rows) == len(lib_report.checks)
        for row, check in zip(rows, lib_report.checks):
            assert row["agent"] == check.agent
            assert row["true_pref"] == check.true_pref
            assert row["misreport"] == check.misreport
            assert row["worst_truth"] == check.worst_truth
            assert row["worst_misreport"] == check.worst_misreport
            assert row["best_truth"] == check.best_truth
            assert row["best_misreport"] == check.best_misreport
            assert row["violates_i"] == check.violates_i
            assert row["violates_ii"] == check.violates_ii

    def test_csv_bytes_stable_across_runs_and_workers(self, tmp_path, capsys):
        args = ["audit", "--mechanism", "rm", "--n", "3", "--m", "2",
                "--capacities", "2,1", "--format", "csv"]
        paths = [tmp_path / f"r{i}.csv" for i in range(3)]
        main(args + ["--report", str(paths[0])])
        main(args + ["--report", str(paths[1])])
        main(args + ["--report", str(paths[2]), "--workers", "2"])
        capsys.readouterr()
        blobs = [p.read_bytes() for p in paths]
        assert blobs[0] == blobs[1] == blobs[2]

    def test_text_report_written(self, tmp_path, capsys):
        report_path = tmp_path / "report.txt"
        main(
            ["audit", "--mechanism", "rm", "--n", "2", "--m", "2",
             "--capacities", "1,1", "--report", str(report_path)]
        )
        capsys.readouterr()
        text = report_path.read_text()
        assert text.startswith("mechanism: rm\n")
        assert "worst_truth=" in text


class TestWitnessCommand:
    def test_part_i(self, capsys):
        rc = main(
            ["witness", "--part", "i", "--true-pref", "1,2,3", "--n", "3",
             "--m", "3", "--capacities", "1,1,1"]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "k_star: 3" in out
        assert "worst-case rank (rho_bar): 3" in out

    def test_part_ii(self, capsys):
        rc = main(
            ["witness", "--part", "ii", "--true-pref", "1,2,3", "--n", "3",
             "--m", "3", "--capacities", "1,1,1"]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "best-case rank (rho_under): 1" in out
        assert "optimal set size: 1" in out

    def test_part_ii_single_agent(self, capsys):
        rc = main(
            ["witness", "--part", "ii", "--true-pref", "1,2", "--n", "1",
             "--m", "2", "--capacities", "1,1"]
        )
        assert rc == 0
        assert "best-case rank (rho_under): 1" in capsys.readouterr().out


class TestLemma1Command:
    def test_pass_exits_zero(self, capsys):
        rc = main(["lemma1", "--n", "3", "--m", "3", "--capacities", "1,1,1"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.count("pass") >= 6

    def test_single_pref(self, capsys):
        rc = main(
            ["lemma1", "--n", "2", "--m", "2", "--capacities", "2,1",
             "--pref", "1,2"]
        )
        assert rc == 0
        assert "k*=1" in capsys.readouterr().out


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_audit_without_source(self, capsys):
        assert main(["audit", "--mechanism", "rm"]) == 1
        assert "provide --file" in capsys.readouterr().err
