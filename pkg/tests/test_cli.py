import pytest

from fairkc.cli import fair_label, main, parse_k_range
from fairkc.utils.data_exporter import read_report

TINY_PMED = "4 3 2\n1 2 5\n2 3 5\n3 4 5\n"


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestLabels:
    """Row labels and k ranges"""

    def test_named_scales(self):
        assert fair_label(1) == "fair-exact"
        assert fair_label(4.0) == "fair-medium"
        assert fair_label(16) == "fair-tight"
        assert fair_label(2.5) == "fair-x2.5"

    def test_k_range(self):
        assert parse_k_range(["2..20"]) == [2, 20]
        assert parse_k_range(["2", "20"]) == [2, 20]


class TestSolve:
    """fairkc solve"""

    def test_prints_radius(self, tiny_pmed, capsys):
        code, out, _ = run(["solve", "--input", tiny_pmed, "--algorithm", "scr"], capsys)
        assert code == 0
        assert out == "tiny\t2\tscr\t5\n"

    def test_writes_report_row(self, tiny_pmed, tmp_path, capsys):
        path = tmp_path / "row.csv"
        code, _, _ = run(["solve", "--input", tiny_pmed, "--algorithm", "gonz1", "--out", str(path)], capsys)
        assert code == 0
        rows = read_report(str(path), "csv")
        assert len(rows) == 1
        assert rows[0].trials == 1
        assert rows[0].lambda_scale is None

    def test_fair_single_realisation(self, tiny_pmed, capsys):
        code, out, _ = run(["solve", "--input", tiny_pmed, "--algorithm", "scr", "--fair", "--seed", "3"], capsys)
        assert code == 0
        assert "fair-medium" in out

    def test_unknown_algorithm(self, tiny_pmed, capsys):
        code, _, err = run(["solve", "--input", tiny_pmed, "--algorithm", "kmeans"], capsys)
        assert code == 2
        assert "algorithms" in err

    def test_k_zero(self, tiny_pmed, capsys):
        code, _, _ = run(["solve", "--input", tiny_pmed, "--algorithm", "scr", "--k", "0"], capsys)
        assert code == 2

    def test_k_too_large(self, tiny_pmed, capsys):
        code, _, err = run(["solve", "--input", tiny_pmed, "--algorithm", "scr", "--k", "9"], capsys)
        assert code == 2
        assert "k must lie" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(["solve", "--input", str(tmp_path / "absent.txt"), "--algorithm", "scr"], capsys)
        assert code == 2


class TestFairEval:
    """fairkc fair-eval"""

    def test_default_scales(self, tiny_pmed, capsys):
        code, out, _ = run(["fair-eval", "--input", tiny_pmed, "--trials", "200", "--out-format", "json"], capsys)
        assert code == 0
        rows = read_report(out, "json")
        assert [r.algorithm for r in rows] == ["fair-exact", "fair-medium", "fair-tight"]
        assert [r.lambda_scale for r in rows] == [1.0, 4.0, 16.0]
        assert all(r.trials == 200 and r.seed == 0 for r in rows)

    def test_single_trial(self, tiny_pmed, capsys):
        code, out, _ = run(["fair-eval", "--input", tiny_pmed, "--trials", "1", "--psi", "1"], capsys)
        assert code == 0
        rows = read_report(out, "csv")
        assert len(rows) == 1
        assert rows[0].trials == 1

    def test_same_seed_same_bytes(self, tiny_pmed, tmp_path, capsys):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            assert main(["fair-eval", "--input", tiny_pmed, "--trials", "300", "--seed", "5",
                         "--out", str(path)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_threads_same_bytes(self, points_csv, tmp_path):
        paths = {threads: tmp_path / f"t{threads}.csv" for threads in (1, 8)}
        for threads, path in paths.items():
            assert main(["fair-eval", "--input", points_csv, "--format", "csv", "--columns", "x,y",
                         "--k", "4", "--trials", "600", "--seed", "11", "--threads", str(threads),
                         "--out", str(path)]) == 0
        assert paths[1].read_bytes() == paths[8].read_bytes()

    def test_algorithm_picks_base(self, tiny_pmed, capsys):
        code, out, _ = run(["fair-eval", "--input", tiny_pmed, "--algorithm", "bruteforce", "--trials", "20"], capsys)
        assert code == 0
        assert len(read_report(out, "csv")) == 3

    def test_two_bases(self, tiny_pmed, capsys):
        code, _, err = run(["fair-eval", "--input", tiny_pmed, "--algorithm", "scr", "--algorithm", "gonz1"], capsys)
        assert code == 2
        assert "base solver" in err

    def test_psi_and_scale_conflict(self, tiny_pmed, capsys):
        code, _, _ = run(["fair-eval", "--input", tiny_pmed, "--psi", "1", "--lambda-scale", "4"], capsys)
        assert code == 2


class TestBench:
    """fairkc bench"""

    def test_pmed_directory(self, tmp_path, capsys):
        for name in ("pmed1.txt", "pmed2.txt"):
            (tmp_path / name).write_text(TINY_PMED)
        code, out, _ = run(["bench", "--input", str(tmp_path), "--trials", "50"], capsys)
        assert code == 0
        rows = read_report(out, "csv")
        assert len(rows) == 2 * 6
        assert [r.algorithm for r in rows[:6]] == [
            "gonz1", "gonzplus", "scr", "fair-exact", "fair-medium", "fair-tight"]
        assert rows[0].instance == "pmed1" and rows[6].instance == "pmed2"

    def test_optima_sidecar(self, tmp_path, capsys):
        (tmp_path / "pmed1.txt").write_text(TINY_PMED)
        optima = tmp_path / "optima.csv"
        optima.write_text("pmed1,5\n")
        code, out, _ = run(["bench", "--input", str(tmp_path), "--trials", "20", "--no-fair",
                            "--optima", str(optima)], capsys)
        assert code == 0
        rows = read_report(out, "csv")
        assert [r.radius_ratio_opt for r in rows] == [1.0, 1.0, 1.0]

    def test_csv_k_range(self, points_csv, capsys):
        code, out, _ = run(["bench", "--input", points_csv, "--format", "csv", "--columns", "x,y",
                            "--k-range", "2..4", "--trials", "30", "--name", "pts"], capsys)
        assert code == 0
        rows = read_report(out, "csv")
        assert len(rows) == 3 * 4
        assert sorted({r.k for r in rows}) == [2, 3, 4]
        assert {r.instance for r in rows} == {"pts"}

    def test_empty_directory(self, tmp_path, capsys):
        code, _, err = run(["bench", "--input", str(tmp_path)], capsys)
        assert code == 2
        assert "No pmed" in err

    def test_csv_needs_columns(self, points_csv, capsys):
        code, _, _ = run(["bench", "--input", points_csv, "--format", "csv", "--k", "3"], capsys)
        assert code == 2


class TestTune:
    """fairkc tune"""

    def test_rows_per_evaluated_scale(self, points_csv, capsys):
        code, out, _ = run(["tune", "--input", points_csv, "--format", "csv", "--columns", "x,y",
                            "--k", "3", "--trials", "100", "--max-pair-ratio", "1000"], capsys)
        assert code == 0
        rows = read_report(out, "csv")
        # the largest scale already meets a loose target
        assert len(rows) == 1
        assert rows[0].lambda_scale == 64.0
