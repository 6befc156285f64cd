import csv
import json

import pytest

from main import EXIT_CAPACITY, EXIT_MALFORMED, EXIT_OK, EXIT_VERIFICATION, main

C_HEADER = {"num_vars": 2, "field": "C"}
F2_HEADER = {"num_vars": 2, "field": "F2"}

# x1*x2 - 1, x1 + x2 - 2, x1 - x2: only (1,1)
UNIQUE_C = [
    [[1, 1, [1, 1]], [-1, 1, [0, 0]]],
    [[1, 1, [1, 0]], [1, 1, [0, 1]], [-2, 1, [0, 0]]],
    [[1, 1, [1, 0]], [-1, 1, [0, 1]]],
]

# x1 + 1, x1*x2 + x2 over F2
TWO_SOLUTION_F2 = [
    [[1, 1, [1, 0]], [1, 1, [0, 0]]],
    [[1, 1, [1, 1]], [1, 1, [0, 1]]],
]

# x1 + x2 - 1
LINEAR = [[[1, 1, [1, 0]], [1, 1, [0, 1]], [-1, 1, [0, 0]]]]


@pytest.fixture
def unique_file(write_system):
    return write_system(C_HEADER, UNIQUE_C)


@pytest.fixture
def f2_file(write_system):
    return write_system(F2_HEADER, TWO_SOLUTION_F2, name="f2.jsonl")


@pytest.fixture
def linear_file(write_system):
    return write_system(C_HEADER, LINEAR, name="linear.jsonl")


class TestLowerbound:
    def test_certified(self, capsys):
        assert main(["lowerbound", "--n", "4"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("# boolean-macaulay-toolkit 1.0.0")

    def test_csv(self, tmp_path):
        target = tmp_path / "pd.csv"
        assert main(["lowerbound", "--n", "3", "--format", "csv", "--no-combined", "--output", str(target)]) == EXIT_OK
        lines = target.read_text(encoding="utf-8").splitlines()
        assert lines[3].startswith("h,")
        assert len(lines) == 4 + 3

    def test_unknown_rule(self):
        assert main(["lowerbound", "--n", "3", "--rule", "h^h"]) == EXIT_MALFORMED


class TestReduce:
    def test_lift_writes_provenance(self, f2_file, tmp_path):
        out = tmp_path / "lifted.jsonl"
        assert main(["reduce", str(f2_file), "--output", str(out)]) == EXIT_OK
        header = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
        assert header["field"] == "C"
        provenance = json.loads((tmp_path / "lifted.jsonl.provenance.json").read_text(encoding="utf-8"))
        assert [v["name"] for v in provenance["var_map"]] == ["x1", "x2", "y1_1", "y2_1"]
        assert provenance["pivot"] is not None
        assert not provenance["zero_solution"]

    def test_isolation_rows(self, f2_file, tmp_path):
        out = tmp_path / "attempt.jsonl"
        assert main(["reduce", str(f2_file), "--output", str(out), "--k", "1", "--seed", "3"]) == EXIT_OK
        provenance = json.loads((tmp_path / "attempt.jsonl.provenance.json").read_text(encoding="utf-8"))
        assert len(provenance["affine_rows"]) == 3
        assert provenance["seeds"] == [3]


class TestBuild:
    def test_boolean(self, unique_file, capsys):
        assert main(["build", str(unique_file)]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert "flavor boolean" in lines
        assert "dims 12 3" in lines

    def test_plain(self, unique_file, capsys):
        assert main(["build", str(unique_file), "--flavor", "plain", "--d", "2"]) == EXIT_OK
        assert "flavor plain" in capsys.readouterr().out.splitlines()

    def test_capacity(self, unique_file):
        assert main(["build", str(unique_file), "--cap", "1"]) == EXIT_CAPACITY

    def test_missing_file(self, tmp_path):
        assert main(["build", str(tmp_path / "absent.jsonl")]) == EXIT_MALFORMED


class TestOracle:
    def test_column_of_kth_entry(self, linear_file, capsys):
        assert main(["oracle", str(linear_file), "--row", "0:0,0", "--k", "0"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "1,0"

    def test_row_of_kth_entry(self, linear_file, capsys):
        assert main(["oracle", str(linear_file), "--col", "1,0", "--k", "0"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "0:0,0"

    def test_value(self, linear_file, capsys):
        assert main(["oracle", str(linear_file), "--row", "0:1,0", "--col", "1,1"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "1"

    def test_k_out_of_range(self, linear_file):
        assert main(["oracle", str(linear_file), "--row", "0:0,0", "--k", "5"]) == EXIT_MALFORMED

    def test_wrong_exponent_length(self, linear_file):
        assert main(["oracle", str(linear_file), "--col", "1,0,0", "--k", "0"]) == EXIT_MALFORMED

    def test_needs_two_selectors(self, linear_file):
        assert main(["oracle", str(linear_file), "--k", "0"]) == EXIT_MALFORMED


class TestAnalyze:
    def test_text(self, unique_file, capsys):
        assert main(["analyze", str(unique_file)]) == EXIT_OK
        assert "kappa" in capsys.readouterr().out

    def test_parse_error(self, tmp_path):
        path = tmp_path / "broken.jsonl"
        path.write_text('{"num_vars": 2, "field": "C"}\n[[1, 1, [1]]]\n', encoding="utf-8")
        assert main(["analyze", str(path)]) == EXIT_MALFORMED

    def test_search_cost_weight(self, unique_file, capsys):
        assert main(["analyze", str(unique_file), "--format", "csv", "--h", "1"]) == EXIT_OK
        rows = {row[0]: row for row in csv.reader(capsys.readouterr().out.splitlines()) if row}
        assert rows["C(n,h)"][1] == "2"
        assert rows["min weight h"][1] == "2"


class TestExtract:
    def test_c_system_is_deterministic(self, unique_file, tmp_path):
        first, second = tmp_path / "a.txt", tmp_path / "b.txt"
        assert main(["extract", str(unique_file), "--seed", "5", "--output", str(first)]) == EXIT_OK
        assert main(["extract", str(unique_file), "--seed", "5", "--output", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()
        assert "assignment (1,1)" in first.read_text(encoding="utf-8")

    def test_f2_pipeline(self, f2_file, capsys):
        assert main(["extract", str(f2_file), "--format", "csv"]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[3] == "success,assignment,attempts,skipped,rounds,k"
        assert out[4].startswith("True,")

    def test_unsatisfiable_f2(self, write_system, capsys):
        path = write_system({"num_vars": 1, "field": "F2"}, [[[1, 1, [0]]]], name="unsat.jsonl")
        assert main(["extract", str(path), "--format", "csv"]) == EXIT_VERIFICATION
        out = capsys.readouterr().out.splitlines()
        assert out[4].startswith("False,")

    def test_tradeoff(self, unique_file, capsys):
        assert main(["extract", str(unique_file), "--tradeoff", "--trials", "5", "--format", "csv"]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[3].startswith("d,")
        assert len(out) == 4 + 2


class TestBench:
    def test_small_sweep(self, tmp_path):
        target = tmp_path / "bench.txt"
        assert main(["bench", "--n-max", "2", "--workers", "2", "--output", str(target)]) == EXIT_OK
        text = target.read_text(encoding="utf-8")
        assert "PD certification sweep" in text

    def test_single_weight(self, tmp_path):
        target = tmp_path / "bench.csv"
        assert main(["bench", "--n-max", "2", "--h", "1", "--workers", "2", "--format", "csv",
                     "--output", str(target)]) == EXIT_OK
        comparisons = [row for row in csv.reader(target.read_text(encoding="utf-8").splitlines())
                       if row and row[0] in ("max", "total", "boolean")]
        assert comparisons and all(row[2] == "1" for row in comparisons)

    def test_rejects_zero_weight(self):
        assert main(["bench", "--n-max", "2", "--h", "0"]) == EXIT_MALFORMED
