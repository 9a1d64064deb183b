"""Command-line front end."""

from __future__ import annotations

import csv
import io
import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from _cases import TABLE1
from pdqkit import numerics
from pdqkit.catalog import make_family
from pdqkit.cli import main, parse_sweep
from pdqkit.pdq import pdq_from_callable, read_pdq_csv, star_transform, write_pdq_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_table1(capsys):
    code, out, _ = run(capsys, "table1")
    assert code == 0
    got = rows(out)
    assert [r["family"] for r in got] == list(TABLE1)
    cols = ["i_u_f", "i_f_u", "sigma0", "sigma1", "j", "j_over_sigma1", "sigma0_over_sigma1"]
    for r in got:
        assert np.all(np.abs(np.array([float(r[c]) for c in cols]) - TABLE1[r["family"]]) <= 5e-4)


def test_table1_json_single_family(capsys):
    code, out, _ = run(capsys, "table1", "--family", "normal", "--format", "json")
    assert code == 0
    (row,) = json.loads(out)
    assert row["i_u_f"] == pytest.approx(0.153, abs=5e-4)
    assert row["i_f_u"] == pytest.approx(0.097, abs=5e-4)
    assert row["j"] == pytest.approx(0.250, abs=5e-4)


def test_map_default_and_sweep(capsys, tmp_path):
    code, out, _ = run(capsys, "map", "--family", "pareto", "--sweep", "a=0.5:2:4")
    assert code == 0
    got = rows(out)
    assert list(got[0]) == ["family", "param", "s1", "s2", "distance"]
    assert [float(r["param"]) for r in got] == [0.5, 1.0, 1.5, 2.0]
    r1 = got[1]
    assert float(r1["distance"]) == pytest.approx(math.hypot(float(r1["s1"]), float(r1["s2"])))
    dest = tmp_path / "loci.csv"
    assert run(capsys, "map", "--family", "power", "-o", str(dest))[0] == 0
    assert dest.read_text().startswith("family,param,s1,s2,distance\n")


def test_map_unknown_default(capsys):
    code, _, err = run(capsys, "map", "--family", "normal")
    assert code == 2
    assert json.loads(err)["error"] == "usage"


def test_iterate_moments_loglog(capsys):
    code, out, err = run(capsys, "iterate", "--family", "loglog", "--engine", "moments",
                         "--n", "5")
    assert code == 0
    kappas = [float(r["kappa"]) for r in rows(out)]
    assert np.allclose(kappas, [3 / 2, 4 / 3, 5 / 4, 6 / 5, 7 / 6], atol=1e-9)
    assert json.loads(err)["verdict"].startswith("converging")


def test_iterate_grid_truncation(capsys):
    code, out, err = run(capsys, "iterate", "--family", "power:b=0.75", "--n", "3")
    assert code == 0
    assert len(rows(out)) == 1
    info = json.loads(err)
    assert info["star_order"] == 2 and info["verdict"] == "stopped: *-order 2"


def test_iterate_dump_and_input(capsys, tmp_path):
    dump = tmp_path / "it"
    code, out, _ = run(capsys, "iterate", "--family", "cauchy", "--n", "3", "--r", "2,4",
                       "--dump", str(dump))
    assert code == 0
    assert rows(out)[0].keys() >= {"lr_2", "lr_4", "sup_norm", "engine"}
    files = sorted(p.name for p in dump.iterdir())
    assert files == ["iterate_001.csv", "iterate_002.csv", "iterate_003.csv"]
    first = read_pdq_csv(dump / "iterate_001.csv")
    assert float(first.density(0.5)) == pytest.approx(2.0, abs=1e-6)
    code, again, _ = run(capsys, "iterate", "--input", str(dump / "iterate_001.csv"), "--n", "2")
    assert code == 0
    k_dump = [float(r["kappa"]) for r in rows(again)]
    k_law = [float(r["kappa"]) for r in rows(out)][:2]
    assert np.allclose(k_dump, k_law, atol=1e-6)


def test_iterate_json(capsys):
    code, out, _ = run(capsys, "iterate", "--family", "normal", "--n", "2", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["engine"] == "grid" and len(d["steps"]) == 2


def test_power_null(capsys):
    code, out, _ = run(capsys, "power", "--alt", "beta:b=1", "--m", "25", "--alpha", "0.05")
    assert code == 0
    assert json.loads(out)["power"] == 0.05


def test_power_sweep(capsys):
    code, out, _ = run(capsys, "power", "--alt", "beta:b=1", "--m", "25", "--sweep",
                       "a=0.6:3:5")
    assert code == 0
    got = rows(out)
    assert list(got[0]) == ["family", "param", "power", "std_error", "m", "alpha", "mode"]
    assert len(got) == 5 and got[0]["family"] == "beta"
    assert float(got[0]["power"]) == pytest.approx(0.9973240165429634, abs=1e-9)


def test_power_monte_carlo(capsys):
    argv = ("power", "--alt", "normal", "--m", "30", "--mode", "monte_carlo", "--reps", "1000",
            "--seed", "5")
    code, out, _ = run(capsys, *argv)
    assert code == 0
    d = json.loads(out)
    assert 0 <= d["power"] <= 1 and d["std_error"] > 0
    assert run(capsys, *argv)[1] == out


def test_test_command(capsys, tmp_path):
    sample = tmp_path / "x.csv"
    sample.write_text("x\n0.5\n")
    code, out, _ = run(capsys, "test", "--alt", "normal", "--input", str(sample), "--mode",
                       "exact_normal")
    assert code == 0
    d = json.loads(out)
    assert d["decision"] == "reject" and d["statistic"] == 0.0
    assert d["mode"] == "exact_normal" and d["m"] == 1
    plain = tmp_path / "y.txt"
    plain.write_text("0.25\n0.75\n")
    code, out, _ = run(capsys, "test", "--alt", "exponential", "--input", str(plain))
    assert json.loads(out)["statistic"] == pytest.approx(math.log(0.75), abs=1e-12)


def test_sample_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for dest in (a, b):
        assert run(capsys, "sample", "--alt", "cauchy", "--m", "20", "--seed", "3",
                   "-o", str(dest))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    x = np.loadtxt(a)
    assert x.shape == (20,) and np.all((x > 0) & (x < 1))
    assert run(capsys, "sample", "--alt", "cauchy", "--m", "20", "--seed", "4")[1] != a.read_text()


def test_seed_env_override(capsys, monkeypatch):
    base = run(capsys, "sample", "--alt", "uniform", "--m", "5", "--seed", "9")[1]
    monkeypatch.setenv("PDQKIT_SEED", "9")
    assert run(capsys, "sample", "--alt", "uniform", "--m", "5")[1] == base
    monkeypatch.setenv("PDQKIT_SEED", "nine")
    assert run(capsys, "sample", "--alt", "uniform", "--m", "5")[0] == 2


def test_grid_size_override_restored(capsys, monkeypatch):
    before = numerics.DEFAULTS.grid_size
    monkeypatch.setenv("PDQKIT_GRID_SIZE", "1025")
    assert run(capsys, "iterate", "--family", "normal", "--n", "1")[0] == 0
    assert numerics.DEFAULTS.grid_size == before
    assert run(capsys, "iterate", "--family", "normal", "--n", "1", "--grid-size", "10")[0] == 2


def test_reconstruct(capsys, tmp_path):
    src = tmp_path / "g.csv"
    write_pdq_csv(star_transform(make_family("power", b=2.0)), src)
    code, out, _ = run(capsys, "reconstruct", "--input", str(src), "--points", "11")
    assert code == 0
    got = rows(out)
    x = np.array([float(r["x"]) for r in got])
    F = np.array([float(r["cdf"]) for r in got])
    assert np.max(np.abs(F - x ** 2)) < 1e-6


def test_numeric_failure_exit_code(capsys, tmp_path):
    src = tmp_path / "bad.csv"
    write_pdq_csv(pdq_from_callable(lambda u: 2.0 * u, endpoint_exponents=(1.0, 0.0)), src)
    code, _, err = run(capsys, "reconstruct", "--input", str(src))
    assert code == 3
    assert json.loads(err)["error"] == "numeric"


@pytest.mark.parametrize("argv", [
    ("bogus",), ("power", "--m", "5"), ("power", "--alt", "nosuch", "--m", "5"),
    ("power", "--alt", "normal:sigma", "--m", "5"), ("power", "--alt", "normal", "--m", "5",
                                                    "--alpha", "2"),
    ("iterate", "--family", "normal", "--n", "0"), ("map", "--family", "pareto", "--sweep", "a=1"),
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert json.loads(err.strip().splitlines()[-1])["exit_code"] == 2


def test_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "reconstruct", "--input", str(tmp_path / "missing.csv"))
    assert code == 4
    assert json.loads(err)["error"] == "io"


def test_parse_sweep():
    key, vals = parse_sweep("b=0.5:1.5:3")
    assert key == "b" and np.allclose(vals, [0.5, 1.0, 1.5])


@pytest.mark.skipif(shutil.which("pdqkit") is None, reason="console script not installed")
def test_console_script_byte_identical(tmp_path):
    cmd = ["pdqkit", "power", "--alt", "pareto:a=1", "--m", "9"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run([sys.executable, "-m", "pdqkit", *cmd[1:]], capture_output=True,
                       check=True).stdout
    assert a == b
    assert json.loads(a)["power"] == pytest.approx(0.857, abs=5e-4)
