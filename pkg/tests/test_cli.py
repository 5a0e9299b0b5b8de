import io as stdio
import json

import pandas as pd
import pytest

from submodnorms.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def csv_output(text):
    return pd.read_csv(stdio.StringIO(text))


@pytest.fixture
def star_file(tmp_path, capsys):
    path = str(tmp_path / "star.json")
    assert main(["gen", "star", "--n", "5", "--output", path]) == 0
    capsys.readouterr()
    return path


class TestUsage:
    def test_help(self, capsys):
        code, out = run(capsys, "--help")
        assert code == 0
        assert "norms" in out

    def test_unknown_flag(self, capsys):
        assert run(capsys, "norms", "rho", "--bogus")[0] == 1

    def test_missing_command(self, capsys):
        assert run(capsys)[0] == 1

    def test_invalid_norm(self, capsys):
        assert run(capsys, "norms", "rho", "--norm", '{"kind": "lp", "n": 3')[0] == 1
        assert run(capsys, "norms", "rho", "--norm", '{"kind": "lp", "n": 3, "p": 0.5}')[0] == 1


class TestNorms:
    def test_rho(self, capsys):
        code, out = run(capsys, "norms", "rho", "--norm", '{"kind": "lp", "n": 16, "p": 2}')
        assert code == 0
        assert json.loads(out)["rho"] == pytest.approx(4.0)

    def test_approx(self, capsys):
        code, out = run(capsys, "norms", "approx", "--norm", '{"kind": "lp", "n": 4, "p": 1}')
        doc = json.loads(out)
        assert code == 0
        assert doc["levels"] == [1, 2, 4]
        assert doc["factor"] == 6
        assert doc["norm"]["kind"] == "ordered"

    def test_check(self, capsys):
        code, out = run(capsys, "norms", "check", "--norm", '{"kind": "lp", "n": 6, "p": 1}',
                        "--trials", "300")
        table = csv_output(out)
        assert code == 0
        assert list(table.columns) == ["check", "trials", "violations", "worst_slack", "passed"]
        assert len(table) == 6
        assert table["passed"].all()

    def test_check_dr_failure(self, capsys, tmp_path):
        path = tmp_path / "l2.json"
        path.write_text(json.dumps({"kind": "lp", "n": 4, "p": 2}))
        code, out = run(capsys, "norms", "check", "--norm", str(path), "--characterization", "dr",
                        "--trials", "10000")
        table = csv_output(out)
        assert code == 0
        assert not table["passed"].iloc[0]
        assert table["violations"].iloc[0] > 0


class TestOfl:
    def test_naive_on_star(self, capsys, star_file):
        code, out = run(capsys, "ofl", "naive", "--instance", star_file, "--seeds", "20")
        table = csv_output(out)
        assert code == 0
        assert table["mean"].iloc[0] == pytest.approx(5.0)
        assert table["stderr"].iloc[0] == 0

    def test_run_writes_traces(self, capsys, star_file, tmp_path):
        traces = tmp_path / "traces.csv"
        code, out = run(capsys, "ofl", "run", "--instance", star_file, "--seeds", "30",
                        "--traces", str(traces))
        assert code == 0
        summary = csv_output(out)
        assert summary["kind"].iloc[0] == "uniform"
        assert summary["passed"].iloc[0]
        assert len(pd.read_csv(traces)) == 30

    def test_step_trace(self, capsys, star_file, tmp_path):
        path = tmp_path / "steps.csv"
        code, _ = run(capsys, "ofl", "run", "--instance", star_file, "--seeds", "3",
                      "--step-trace", str(path), "--trace-seed", "2")
        steps = pd.read_csv(path)
        assert code == 0
        assert list(steps.columns) == ["step", "request", "opened", "level", "d", "dhat", "tau",
                                       "p0", "p1"]
        assert steps["step"].tolist() == [0, 1, 2, 3, 4]
        assert steps["request"].tolist() == [1, 2, 3, 4, 5]
        assert steps["opened"].iloc[0] == 1
        assert (steps["d"] <= steps["dhat"] + 1e-9).all()
        assert (steps["p0"] + steps["p1"]).to_numpy() == pytest.approx(1.0)

    def test_step_trace_negative_seed(self, capsys, star_file, tmp_path):
        assert run(capsys, "ofl", "naive", "--instance", star_file, "--seeds", "2",
                   "--step-trace", str(tmp_path / "s.csv"), "--trace-seed", "-1")[0] == 1

    def test_bounds_with_stages(self, capsys, star_file):
        code, out = run(capsys, "ofl", "bounds", "--instance", star_file, "--seeds", "10", "--stages")
        table = csv_output(out)
        assert code == 0
        assert {"ld_mean", "sd_mean", "ld_bound", "sd_bound"} <= set(table.columns)

    def test_opt(self, capsys, star_file):
        code, out = run(capsys, "ofl", "opt", "--instance", star_file)
        doc = json.loads(out)
        assert code == 0
        assert doc["cost"] == pytest.approx(2.0)
        assert doc["facilities"] == [0]

    def test_budget_exit_code(self, capsys, tmp_path):
        path = str(tmp_path / "euclid.json")
        assert main(["gen", "euclid", "--n", "25", "--output", path]) == 0
        assert run(capsys, "ofl", "opt", "--instance", path)[0] == 2

    def test_lowerbound(self, capsys):
        code, out = run(capsys, "ofl", "lowerbound", "--k", "2", "--seeds", "5")
        table = csv_output(out)
        assert code == 0
        assert table["k"].tolist() == [2]
        assert table["n"].tolist() == [4]
        assert table["estimate"].iloc[0] == "finite-arity"
        assert table["mean_ratio"].iloc[0] >= 0.5


class TestProbe:
    @pytest.fixture
    def probing_file(self, tmp_path, capsys):
        path = str(tmp_path / "probing.json")
        assert main(["gen", "probing", "--n", "3", "--seed", "2", "--family", "cardinality",
                     "--output", path]) == 0
        capsys.readouterr()
        return path

    def test_adap_and_na(self, capsys, probing_file):
        adap = json.loads(run(capsys, "probe", "adap", "--instance", probing_file)[1])
        na = json.loads(run(capsys, "probe", "na", "--instance", probing_file)[1])
        gap = json.loads(run(capsys, "probe", "gap", "--instance", probing_file)[1])
        assert adap["adaptive"] >= na["nonadaptive"] - 1e-12
        assert gap["adaptive"] == pytest.approx(adap["adaptive"])
        assert 1.0 <= gap["ratio"] <= 2.0 + 1e-9

    def test_state_budget(self, capsys, probing_file):
        assert run(capsys, "probe", "adap", "--instance", probing_file, "--max-states", "1")[0] == 2

    def test_budgets_must_be_positive(self, capsys, probing_file):
        assert run(capsys, "probe", "gap", "--instance", probing_file, "--max-states", "0")[0] == 1


class TestLoadBal:
    @pytest.fixture
    def loadbal_file(self, write_json):
        return write_json("lb.json", {
            "schema": 1,
            "p": [[1.0, 2.0, 3.0], [2.0, 1.0, 1.0]],
            "inner_norms": [{"kind": "lp", "n": 3, "p": 2}, {"kind": "top_k", "n": 3, "k": 2}],
        })

    def test_greedy_with_opt(self, capsys, loadbal_file):
        code, out = run(capsys, "loadbal", "greedy", "--instance", loadbal_file, "--with-opt")
        table = csv_output(out)
        assert code == 0
        assert len(table) == 2
        assert (table["greedy_cost"] >= table["opt_cost"] - 1e-9).all()

    def test_symmetric(self, capsys, loadbal_file):
        code, out = run(capsys, "loadbal", "greedy", "--instance", loadbal_file, "--symmetric")
        assert code == 0
        assert "source_load" in csv_output(out).columns

    def test_opt_budget(self, capsys, loadbal_file):
        assert run(capsys, "loadbal", "opt", "--instance", loadbal_file, "--max-assignments", "4")[0] == 2

    def test_opt_budget_must_be_positive(self, capsys, loadbal_file):
        assert run(capsys, "loadbal", "opt", "--instance", loadbal_file, "--max-assignments", "0")[0] == 1


class TestGen:
    def test_tree_is_deterministic(self, capsys):
        first = run(capsys, "gen", "tree", "--n", "27", "--seed", "3")[1]
        second = run(capsys, "gen", "tree", "--n", "27", "--seed", "3")[1]
        assert first == second
        assert json.loads(first)["metric"]["type"] == "tree"

    def test_verbose(self, capsys):
        assert run(capsys, "-v", "gen", "star", "--n", "2")[0] == 0
