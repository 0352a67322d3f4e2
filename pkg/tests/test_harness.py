import csv
import io
import math
from fractions import Fraction

import pytest

from torsion_lab import cli, harness
from torsion_lab.harness import ExperimentConfig, run_experiment

from conftest import DATA, T3_TEXT


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(DATA / "trefoil.pres", max_index=0)
    with pytest.raises(ValueError):
        ExperimentConfig(DATA / "trefoil.pres", jobs=0)


def test_trefoil_pipeline(tmp_path):
    out = tmp_path / "t.csv"
    rows, summary = run_experiment(ExperimentConfig(DATA / "trefoil.pres", max_index=5, volume=0.0, out=out))
    assert all(r.t1_bound_holds for r in rows)
    assert summary.vol_reference == 0.0
    assert any("finite index" in n for n in summary.notes)
    assert [r.index for r in rows] == [1, 2, 3, 3, 4, 4, 4, 5, 5]


def test_unknot_rows_are_trivial(tmp_path):
    rows, summary = run_experiment(ExperimentConfig(DATA / "unknot.pres", max_index=4, cyclic_max_n=5))
    assert rows and all(r.t1 == 1 and r.log_t1_per_index == 0 for r in rows)
    assert summary.max_log_t1_per_index == 0


def test_volume_reference_column(tmp_path):
    out = tmp_path / "f.csv"
    run_experiment(ExperimentConfig(DATA / "figure8.pres", max_index=3, volume=2.029883212819, out=out))
    rows = read_csv(out)
    for r in rows:
        assert float(r["vol_reference"]) == pytest.approx(2.029883212819 / (6 * math.pi), rel=1e-14)
        assert float(r["vol_reference"]) == pytest.approx(0.10769, abs=5e-6)


def test_csv_is_deterministic_and_parallel_safe(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    base = dict(presentation=DATA / "figure8.pres", max_index=5, cyclic_max_n=6, volume=2.029883212819)
    run_experiment(ExperimentConfig(out=a, **base))
    run_experiment(ExperimentConfig(out=b, **base))
    run_experiment(ExperimentConfig(out=c, jobs=3, **base))
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_rows_are_self_consistent(tmp_path):
    out = tmp_path / "r.csv"
    _, summary = run_experiment(ExperimentConfig(DATA / "figure8.pres", max_index=5, cyclic_max_n=5, out=out))
    rows = read_csv(out)
    for r in rows:
        t1 = int(r["t1"])
        verdict = t1 * t1 <= Fraction(r["det_beta_squared"]) * int(r["det_j_squared"])
        assert r["t1_bound_holds"] == str(verdict).lower()
        # 15 significant digits
        assert float(r["log_t1_per_index"]) == pytest.approx(math.log(t1) / int(r["index"]), rel=1e-14)
    assert summary.max_log_t1_per_index == max(float(r["log_t1_per_index"]) for r in rows)
    assert summary.max_log_det_j_per_index == max(float(r["log_det_j_per_index"]) for r in rows)


def test_cyclic_rows_get_mahler_line():
    _, summary = run_experiment(ExperimentConfig(DATA / "figure8.pres", max_index=1, cyclic_max_n=4))
    assert summary.log_mahler == pytest.approx(math.log((3 + math.sqrt(5)) / 2))
    assert any("Mahler" in n for n in summary.notes)


def test_closed_shape_rows(tmp_path):
    pres = tmp_path / "t3.pres"
    pres.write_text(T3_TEXT)
    rows, _ = run_experiment(ExperimentConfig(pres, max_index=2, diagnostics=True))
    assert all(not r.error for r in rows)
    assert rows[0].b1 == 3 and rows[0].closed_ratio is not None and rows[0].t1_bound_holds is None


def test_row_errors_do_not_stop_the_run(tmp_path):
    pres = tmp_path / "odd.pres"
    pres.write_text("generators: a b\nrelators: a^2; b^2; a b a b\n")
    out = tmp_path / "odd.csv"
    rows, summary = run_experiment(ExperimentConfig(pres, max_index=2, out=out))
    assert len(rows) > 1 and summary.errors == len(rows)
    assert all("ShapeError" in r["error"] for r in read_csv(out))


def test_formatting():
    assert harness.fmt_float(math.pi) == "3.14159265358979"
    assert harness.fmt_float(None) == ""
    assert harness.fmt_exact(Fraction(4, 1)) == "4"
    assert harness.fmt_exact(Fraction(9, 4)) == "9/4"
    assert harness.fmt_exact(10**30) == str(10**30)


# --- CLI -------------------------------------------------------------------------


def test_cli_check_writes_csv(tmp_path, capsys):
    out = tmp_path / "o.csv"
    assert cli.main(["check", str(DATA / "trefoil.pres"), "--max-index", "3", "--out", str(out)]) == 0
    assert read_csv(out)[0]["subgroup_id"] == "L1.1"
    assert "max ln t1/N" in capsys.readouterr().out


def test_cli_config_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "o.csv"
    cfg.write_text(f"# run\nmax-index = 4\nvolume = 2.029883212819\nout = {out}\nconjugates = no\n")
    assert cli.main(["check", str(DATA / "figure8.pres"), "--config", str(cfg)]) == 0
    assert max(int(r["index"]) for r in read_csv(out)) == 4
    assert cli.main(["check", str(DATA / "figure8.pres"), "--config", str(cfg), "--max-index", "2"]) == 0
    assert max(int(r["index"]) for r in read_csv(out)) == 2


def test_cli_rejects_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("max-idx = 3\n")
    assert cli.main(["check", str(DATA / "figure8.pres"), "--config", str(cfg)]) == 2
    assert "unknown config key" in capsys.readouterr().err


def test_cli_cyclic(tmp_path):
    out = tmp_path / "c.csv"
    assert cli.main(["cyclic", str(DATA / "figure8.pres"), "--max-n", "6", "--out", str(out)]) == 0
    assert [int(r["torsion"]) for r in read_csv(out)] == [5, 16, 45, 121, 320]


def test_cli_density(capsys):
    assert cli.main(["density", str(DATA / "trefoil.pres"), "--tower", "cyclic", "--max-n", "4"]) == 0
    captured = capsys.readouterr()
    rows = list(csv.DictReader(io.StringIO(captured.out)))
    assert [int(r["det_prime_squared"]) for r in rows] == [1, 9, 16, 9]
    assert "norm bound" in captured.err


def test_cli_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.pres"
    bad.write_text("generators: a\nrelators: a b\n")
    assert cli.main(["check", str(bad)]) == 2
    assert "undeclared" in capsys.readouterr().err


def test_cli_selfcheck_passes(capsys):
    assert cli.main(["selfcheck", "--max-index", "4"]) == 0
    assert "7/7 suites passed" in capsys.readouterr().out


def test_cli_selfcheck_fails_on_corrupted_presentation(tmp_path, capsys):
    for f in DATA.glob("*.pres"):
        (tmp_path / f.name).write_text(f.read_text())
    (tmp_path / "trefoil.pres").write_text("generators: a b\nrelators: a b ; q\n")
    assert cli.main(["selfcheck", "--presentations", str(tmp_path), "--suite", "parse"]) == 1
    assert "FAIL" in capsys.readouterr().out
