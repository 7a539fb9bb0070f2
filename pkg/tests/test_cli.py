import io
import json
from importlib.resources import files

import pytest

from relgrowth.cli import main, parse_hom, parse_window


def fixture_path(name):
    return str(files("relgrowth") / "fixtures" / f"{name}.aut")


def run(args, tmp_path, capsys=None):
    out = io.StringIO()
    code = main([*args, "--out-dir", str(tmp_path)], out=out)
    return code, out.getvalue()


def test_parse_helpers():
    assert parse_hom("a:1,0;b:0,1") == {"a": (1, 0), "b": (0, 1)}
    assert parse_window("40:160") == (40, 160)


def test_validate_f2(tmp_path):
    code, text = run(["validate", "--input", fixture_path("f2")], tmp_path)
    assert code == 0
    assert (tmp_path / "validation.txt").read_text() == text


def test_validate_two_max(tmp_path, capsys):
    code, text = run(["validate", "--input", fixture_path("two_max")], tmp_path)
    assert code == 1
    assert "->" in text


def test_missing_hom(tmp_path):
    src = "\n".join(l for l in open(fixture_path("f2")).read().splitlines() if not l.startswith("hom"))
    p = tmp_path / "nohom.aut"
    p.write_text(src + "\n")
    code, text = run(["validate", "--input", str(p)], tmp_path)
    assert code == 1
    assert "homomorphism incomplete" in text


def test_analyze_zero_weight(tmp_path, capsys):
    code, _ = run(["analyze", "--input", fixture_path("period2")], tmp_path)
    assert code != 0


def test_analyze_f2(tmp_path):
    code, text = run(["analyze", "--group", "f2"], tmp_path)
    assert code == 0
    assert "(1/2, 1/2)" in text
    assert "cross-check PASS" in text


def test_analyze_f2_nu1(tmp_path):
    code, text = run(["analyze", "--group", "f2", "--hom", "a:1;b:0"], tmp_path)
    assert code == 0
    assert "D (lcm) = 1" in text


def test_count_rows(tmp_path):
    code, text = run(["count", "--group", "f2", "--n-max", "12"], tmp_path)
    assert code == 0
    rows = [l.split(",") for l in text.splitlines()[1:]]
    assert rows[0] == ["0", "1", "1", "1"]
    assert rows[4][:3] == ["4", "108", "8"]
    assert rows[4][3].startswith("0.0740")
    assert all(r[2] == "0" for r in rows[1::2])


def test_count_budget(tmp_path, capsys):
    code, text = run(["count", "--group", "f2", "--n-max", "40", "--cell-budget", "2000"], tmp_path)
    assert code == 2
    assert "budget exceeded" in capsys.readouterr().err
    lines = (tmp_path / "counts.csv").read_text().splitlines()
    assert 2 < len(lines) < 42


def test_count_target(tmp_path):
    code, text = run(["count", "--group", "f2", "--n-max", "6", "--target", "1,0"], tmp_path)
    assert code == 0
    assert text.splitlines()[2].split(",")[2] == "1"


def test_determinism(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        run(["scan", "--group", "f2", "--seed", "3"], d)
        run(["count", "--group", "f2", "--n-max", "30"], d)
        outs.append([(d / f).read_bytes() for f in ("scan.csv", "near_max.json", "counts.csv")])
    assert outs[0] == outs[1]


def test_config_file_flags_win(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"group": "f2", "n_max": 8}))
    _, text = run(["count", "--config", str(cfg)], tmp_path)
    assert len(text.splitlines()) == 10
    _, text = run(["count", "--config", str(cfg), "--n-max", "5"], tmp_path)
    assert len(text.splitlines()) == 7


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"group": "f2", "bogus": 1}))
    code, _ = run(["count", "--config", str(cfg)], tmp_path)
    assert code == 1


def test_truncated_report_skips(tmp_path, capsys):
    code, text = run(["report", "--group", "f2", "--n-max", "20"], tmp_path)
    assert code == 0
    assert "SKIPPED  asymptotic exponent" in text
    assert "warning" in capsys.readouterr().err
    assert (tmp_path / "report.txt").exists()


def test_fourier(tmp_path):
    code, text = run(["fourier", "--group", "f2", "--n-max", "8"], tmp_path)
    assert code == 0
    assert text.rstrip().endswith("PASS")


def test_fit_and_rationality(tmp_path):
    code, text = run(["fit", "--group", "f2", "--hom", "a:1;b:0", "--n-max", "120"], tmp_path)
    assert code == 0
    slope = float(text.split("slope ")[1].split(",")[0])
    assert -0.55 < slope < -0.45
    assert (tmp_path / "fit_residuals.dat").exists()
    code, text = run(["rationality", "--group", "f2", "--n-max", "80"], tmp_path)
    assert code == 0


def test_oracle(tmp_path):
    code, text = run(["oracle", "--group", "f2", "--n-max", "5"], tmp_path)
    assert code == 0
    assert "4,0,0,8" in text
    assert (tmp_path / "oracle.csv").exists()


def test_oracle_budget(tmp_path, capsys):
    code, _ = run(["oracle", "--group", "f3", "--n-max", "12", "--word-budget", "100"], tmp_path)
    assert code == 2


def test_bad_grid(tmp_path, capsys):
    code, _ = run(["scan", "--group", "f2", "--grid", "4"], tmp_path)
    assert code == 1
