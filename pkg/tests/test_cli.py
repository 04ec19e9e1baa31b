"""End-to-end tests for the command-line interface."""

import json

import pytest
from click.testing import CliRunner

from paretosearch.cli import main
from paretosearch.pipeline import load_records


@pytest.fixture()
def runner():
    return CliRunner()


def write_sessions(path, games=1, clicks=6, seed=0):
    from paretosearch.pipeline import save_sessions, simulate

    save_sessions(path, simulate(games, seed=seed, clicks=clicks))


class TestSimulate:
    def test_stdout_jsonl(self, runner):
        res = runner.invoke(main, ["simulate", "--games", "2", "--clicks", "4"])
        assert res.exit_code == 0
        lines = [l for l in res.output.splitlines() if l.strip()]
        assert len(lines) == 2
        rec = json.loads(lines[0])
        assert set(rec) == {"user_id", "problem_id", "clicks", "complete"}
        assert len(rec["clicks"]) == 4

    def test_file_output(self, runner, tmp_path):
        out = tmp_path / "sessions.jsonl"
        res = runner.invoke(
            main, ["simulate", "--games", "1", "--clicks", "5", "--out", str(out)]
        )
        assert res.exit_code == 0
        assert out.exists()
        assert len(out.read_text().splitlines()) == 1

    def test_seed_reproducible(self, runner):
        a = runner.invoke(main, ["simulate", "--seed", "7", "--clicks", "4"])
        b = runner.invoke(main, ["simulate", "--seed", "7", "--clicks", "4"])
        assert a.output == b.output

    def test_unknown_policy(self, runner):
        res = runner.invoke(main, ["simulate", "--policy", "psychic"])
        assert res.exit_code == 1
        assert "error:" in res.output


class TestAnalyze:
    def test_writes_records_csv(self, runner, tmp_path):
        sessions = tmp_path / "sessions.jsonl"
        write_sessions(sessions, clicks=5)
        out = tmp_path / "out"
        res = runner.invoke(
            main, ["analyze", "--sessions", str(sessions), "--out", str(out)]
        )
        assert res.exit_code == 0, res.output
        records = load_records(out / "records.csv")
        assert len(records) == 3 * (5 - 3)

    def test_schema_error_exits_2(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"user_id": "U01"}\n')
        out = tmp_path / "out"
        res = runner.invoke(
            main, ["analyze", "--sessions", str(bad), "--out", str(out)]
        )
        assert res.exit_code == 2
        assert "error:" in res.output

    def test_parse_error_exits_2(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("not json at all\n")
        out = tmp_path / "out"
        res = runner.invoke(
            main, ["analyze", "--sessions", str(bad), "--out", str(out)]
        )
        assert res.exit_code == 2
        assert "line 1" in res.output

    def test_missing_file_is_usage_error(self, runner, tmp_path):
        res = runner.invoke(
            main,
            ["analyze", "--sessions", str(tmp_path / "nope.jsonl"), "--out", "x"],
        )
        assert res.exit_code == 2


class TestReport:
    def test_full_chain(self, runner, tmp_path):
        sessions = tmp_path / "sessions.jsonl"
        write_sessions(sessions, games=4, clicks=6, seed=3)
        records_dir = tmp_path / "records"
        res = runner.invoke(
            main, ["analyze", "--sessions", str(sessions), "--out", str(records_dir)]
        )
        assert res.exit_code == 0, res.output

        report_dir = tmp_path / "report"
        res = runner.invoke(
            main,
            [
                "report",
                "--records",
                str(records_dir / "records.csv"),
                "--out",
                str(report_dir),
            ],
        )
        assert res.exit_code == 0, res.output
        assert "Pareto counts per measure" in res.output
        assert (report_dir / "acr_summary.csv").exists()
        assert (report_dir / "measure_counts.csv").exists()
        assert (report_dir / "trees.json").exists()

    def test_bad_records_header_exits_2(self, runner, tmp_path):
        bad = tmp_path / "records.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        res = runner.invoke(
            main, ["report", "--records", str(bad), "--out", str(tmp_path / "r")]
        )
        assert res.exit_code == 2


class TestHelp:
    def test_group_lists_commands(self, runner):
        res = runner.invoke(main, ["--help"])
        assert res.exit_code == 0
        for cmd in ("analyze", "report", "simulate", "serve"):
            assert cmd in res.output
