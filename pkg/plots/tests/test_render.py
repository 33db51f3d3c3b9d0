import numpy as np
import pytest

from banditplots.cli import main as cli_main
from banditplots.render import FigureSpec, SchemaError, read_rows, render

BIAS_CSV = """arm,bias,se,ci_lo,ci_hi
0,0,0.001,-0.00196,0.00196
1,-0.02,0.002,-0.02392,-0.01608
2,-0.05,0.003,-0.05588,-0.04412
"""

REGRET_CSV = """t,regret_mean,regret_se,policy
1,0.05,0.01,ucb
10,0.4,0.05,ucb
100,2.5,0.2,ucb
1,0.06,0.01,privucb
10,0.5,0.06,privucb
100,4.5,0.3,privucb
"""

PVALUES_CSV_HEADER = "rep,pvalue,zstat,arm_star\n"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def pvalues_csv(tmp_path, ps):
    rows = "".join(f"{i},{p},0.0,1\n" for i, p in enumerate(ps))
    return write(tmp_path, "pvalues.csv", PVALUES_CSV_HEADER + rows)


class TestSchema:
    def test_missing_column_is_hard_error(self, tmp_path):
        path = write(tmp_path, "bad.csv", "arm,bias,se\n0,0,0\n")
        with pytest.raises(SchemaError, match="ci_lo"):
            read_rows(path, "bias-bars")

    def test_missing_file_reported(self, tmp_path):
        with pytest.raises(SchemaError, match="not found"):
            read_rows(tmp_path / "absent.csv", "bias-bars")

    def test_empty_file_rejected(self, tmp_path):
        path = write(tmp_path, "empty.csv", "arm,bias,se,ci_lo,ci_hi\n")
        with pytest.raises(SchemaError, match="no data"):
            read_rows(path, "bias-bars")

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(SchemaError, match="unknown figure kind"):
            FigureSpec("scatter", tmp_path / "x.csv", tmp_path / "x.png")

    def test_out_of_range_pvalues_rejected(self, tmp_path):
        path = pvalues_csv(tmp_path, [0.5, 1.7])
        spec = FigureSpec("pvalue-hist", path, tmp_path / "h.png")
        with pytest.raises(SchemaError, match="outside"):
            render(spec)


class TestRendering:
    def test_bias_bars_written(self, tmp_path):
        path = write(tmp_path, "bias.csv", BIAS_CSV)
        out = tmp_path / "bias.png"
        render(FigureSpec("bias-bars", path, out))
        assert out.stat().st_size > 1000

    def test_regret_two_labeled_curves(self, tmp_path):
        path = write(tmp_path, "regret.csv", REGRET_CSV)
        out = tmp_path / "regret.svg"
        render(FigureSpec("regret-curves", path, out))
        svg = out.read_text()
        assert "ucb" in svg and "privucb" in svg

    def test_histogram_mass_printed_and_returned(self, tmp_path, capsys):
        ps = [0.01, 0.02, 0.04, 0.2, 0.5, 0.9, 0.95, 0.3, 0.6, 0.7]
        path = pvalues_csv(tmp_path, ps)
        out = tmp_path / "hist.png"
        mass = render(FigureSpec("pvalue-hist", path, out, alpha=0.05))
        assert mass == pytest.approx(0.3)
        printed = capsys.readouterr().out
        assert "mass below alpha=0.05: 0.3 (3 of 10)" in printed
        assert out.exists()

    def test_inputs_untouched(self, tmp_path):
        path = write(tmp_path, "bias.csv", BIAS_CSV)
        before = path.read_bytes()
        render(FigureSpec("bias-bars", path, tmp_path / "b.png"))
        assert path.read_bytes() == before

    @pytest.mark.parametrize("suffix", [".png", ".svg"])
    def test_repeat_renders_identical_bytes(self, tmp_path, suffix):
        path = write(tmp_path, "bias.csv", BIAS_CSV)
        out1, out2 = tmp_path / f"a{suffix}", tmp_path / f"b{suffix}"
        render(FigureSpec("bias-bars", path, out1))
        render(FigureSpec("bias-bars", path, out2))
        assert out1.read_bytes() == out2.read_bytes()


class TestCli:
    def test_round_trip(self, tmp_path, capsys):
        path = write(tmp_path, "regret.csv", REGRET_CSV)
        out = tmp_path / "r.png"
        rc = cli_main(["regret-curves", "--in", str(path), "--out", str(out)])
        assert rc == 0
        assert out.exists()

    def test_schema_error_exit_code_and_diagnostics(self, tmp_path, capsys):
        path = write(tmp_path, "bad.csv", "t,regret_mean\n1,0.5\n")
        rc = cli_main(["regret-curves", "--in", str(path),
                       "--out", str(tmp_path / "r.png")])
        assert rc == 2
        err = capsys.readouterr().err
        assert "regret_se" in err and "policy" in err

    def test_alpha_marker_threshold(self, tmp_path, capsys):
        path = pvalues_csv(tmp_path, [0.005, 0.02, 0.5, 0.9])
        rc = cli_main(["pvalue-hist", "--in", str(path),
                       "--out", str(tmp_path / "h.png"), "--alpha", "0.01"])
        assert rc == 0
        assert "mass below alpha=0.01: 0.25 (1 of 4)" in capsys.readouterr().out
