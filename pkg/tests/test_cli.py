import csv
import io
import json
import subprocess
import sys

import pytest

from qrnorms.cli import main, read_config, ConfigError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_norms_csv(capsys):
    code, out, _ = run(capsys, "run", "norms", "--levels", "2")
    assert code == 0
    assert "seed=0" in out.splitlines()[0] and "tol=1e-09" in out.splitlines()[0]
    body = rows(out)
    assert [r["level"] for r in body] == ["0", "1", "2"]
    assert all(abs(float(r["value"]) - 1) <= 1e-9 for r in body)


def test_folner_matches_formulas(capsys):
    code, out, _ = run(capsys, "folner", "run", "--levels", "2", "--k", "auto")
    assert code == 0
    body = rows(out)
    assert [(r["size"], r["boundary"], r["ratio_boundary"]) for r in body] == [
        ("2", "4", "2.0"), ("16", "24", "1.5")]
    for col in ("level", "size", "boundary", "ratio_boundary", "ratio_volume", "residual_a", "residual_b", "bound"):
        assert col in body[0]


def test_interpolate_minimal_gamma(capsys, tmp_path):
    g = tmp_path / "gamma.txt"
    g.write_text("1\n1\n1\n")
    code, out, _ = run(capsys, "report", "interpolate", "--gamma", str(g), "--k", "1", "--radius", "3")
    assert code == 0
    body = rows(out)
    assert [float(r["sparse_norm"]) for r in body] == pytest.approx([1.0, 0.5**0.5, 0.5], abs=1e-12)


def test_json_mirrors_csv(capsys):
    _, out_csv, _ = run(capsys, "spectra", "gap", "--levels", "2")
    _, out_json, _ = run(capsys, "spectra", "gap", "--levels", "2", "--format", "json")
    doc = json.loads(out_json)
    assert doc["meta"]["seed"] == 0
    assert [str(r["value"]) for r in doc["rows"]] == [r["value"] for r in rows(out_csv)]


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# sl2 survey\nbackend = sl2\nmoduli = 3,5\nseed = 9\n")
    code, out, _ = run(capsys, "run", "gap", "--config", str(cfg))
    assert code == 0 and "backend=sl2" in out and "seed=9" in out
    assert len(rows(out)) == 2
    code, out, _ = run(capsys, "run", "gap", "--config", str(cfg), "--seed", "4")
    assert "seed=4" in out


def test_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config(cfg)
    code, _, err = run(capsys, "run", "norms", "--config", str(cfg))
    assert code == 2 and "unknown key" in err
    code, _, err = run(capsys, "run", "norms", "--backend", "file")
    assert code == 2 and "--path" in err
    code, _, err = run(capsys, "run", "norms", "--element", "0.5*a +")
    assert code == 2


def test_failed_check_gives_nonzero_exit(capsys, tmp_path):
    # S_3 on three points: the stabilizer is not normal, so the shortest relator moves points
    p = tmp_path / "s3.txt"
    p.write_text("nu 3 gens 2\na 1 0 2\nb 0 2 1\nbasepoint 0\n")
    code, out, err = run(capsys, "geometry", "alpha", "--backend", "file", "--path", str(p))
    assert code == 1 and "FAILED" in err


def test_out_file_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["sparse", "norm", "--levels", "2", "--budget", "3", "--strategy", "power",
                     "--seed", "5", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    # rerunning overwrites rather than appends
    main(["sparse", "norm", "--levels", "2", "--budget", "3", "--out", str(a)])
    assert a.read_text().count("# ") == 1


def test_other_commands(capsys):
    for argv in (["tower", "build", "--levels", "2"],
                 ["geometry", "lift-check", "--backend", "sl2", "--moduli", "7"],
                 ["spectra", "rho", "--levels", "2", "--element", "(1+1j)*ab - B"],
                 ["spectra", "regular", "--radius", "4"],
                 ["sparse", "deficiency", "--backend", "sl2", "--moduli", "3,5"],
                 ["sparse", "deficiency", "--levels", "2", "--strategy", "folner-seeded"]):
        code, out, err = run(capsys, *argv)
        assert code == 0, (argv, err)
        assert len(rows(out)) >= 1


def test_rho_needs_a_tower(capsys):
    code, _, err = run(capsys, "spectra", "rho", "--backend", "sl2", "--moduli", "3,5")
    assert code == 2 and "tower" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qrnorms", "run", "norms", "--levels", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1] == "level,quantity,value,residual"
