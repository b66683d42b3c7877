import csv
import io
import json
import os
import subprocess
import sys
from fractions import Fraction

import pytest

import oracle
from smallgaps import cli
from smallgaps.diffset import build
from smallgaps.gaps import format_value, gap_curve
from smallgaps.numeric import AmbiguityError
from smallgaps.sequences import parse_family


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_diffset_example(capsys):
    code, out, _ = run(capsys, "diffset", "--family", "arithmetic:1,1", "--n", "10")
    assert code == 0
    head, row = rows(out)
    assert head == ["N", "C_N", "D_N", "H_N", "T_N", "B_N", "B_tilde_N"]
    assert row[0] == "10" and row[2] == "9"


def test_diffset_all_rows(capsys):
    code, out, _ = run(capsys, "diffset", "--family", "polynomial:2", "--n", "6", "--all")
    assert code == 0 and [r[0] for r in rows(out)[1:]] == ["1", "2", "3", "4", "5", "6"]


def test_gaps_floor_matches_oracle(capsys):
    code, out, _ = run(capsys, "gaps", "--family", "polynomial:2", "--n", "100", "--alpha", "0.25", "--variant", "floor")
    assert code == 0
    row = rows(out)[1]
    vals = [Fraction(n * n) for n in range(1, 101)]
    want = oracle.gaps_exact(vals, 100, Fraction(1, 4))[3]
    assert Fraction(row[3]) == want == 0
    m, n = int(row[4]), int(row[5])
    assert (n * n - m * m) % 4 == 0


def test_gaps_is_a_thin_adapter(capsys):
    code, out, _ = run(capsys, "gaps", "--family", "beatty:pi", "--grid", "2:30", "--alpha", "frac:e", "--variant", "tilde")
    assert code == 0
    fd = build(parse_family("beatty:pi"), 30)
    lib = gap_curve(fd.window, "frac:e", range(2, 31), "tilde", floored=fd)
    got = rows(out)[1:]
    assert [r[3] for r in got] == [format_value(e.value) for e in lib]
    assert [(int(r[4]), int(r[5])) for r in got] == [e.pair for e in lib]


def test_gaps_all_variants_json(capsys):
    code, out, _ = run(capsys, "gaps", "--family", "arithmetic:1,1", "--n", "11", "--alpha", "0.305", "--variant", "all", "--format", "json")
    data = json.loads(out)
    assert code == 0 and [d["variant"] for d in data] == ["std", "tilde", "hat", "floor"]
    assert data[0]["value"] == "1/20"


def test_grid_grammar():
    assert cli.parse_grid("100") == [100]
    assert cli.parse_grid("10, 20,5") == [5, 10, 20]
    assert cli.parse_grid("2:5") == [2, 3, 4, 5]
    g = cli.parse_grid("log:10:5000:60")
    assert g[0] == 10 and g[-1] == 5000 and len(g) <= 60


def test_seq(capsys):
    code, out, _ = run(capsys, "seq", "--family", "beatty:sqrt2", "--n", "5")
    assert code == 0 and [r[1] for r in rows(out)[1:]] == ["1", "2", "4", "5", "7"]
    code, out, _ = run(capsys, "seq", "--family", "polynomial:1/2", "--n", "2", "--digits", "12")
    assert rows(out)[2][1] == "1.41421356237"


def test_missing_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "diffset", "--family", "arithmetic:1,1")
    assert code == 64
    assert "usage:" in err and "family grammar" in err
    code, _, err = run(capsys, "verify", "--families", "polynomial:2|50")
    assert code == 64 and "--seed" in err
    code, _, err = run(capsys)
    assert code == 64
    code, _, _ = run(capsys, "gaps", "--bogus")
    assert code == 64


def test_exit_codes(capsys, monkeypatch):
    code, _, err = run(capsys, "diffset", "--family", "nosuch:1", "--n", "5")
    assert code == 1 and "error" in err
    code, _, _ = run(capsys, "verify", "--seed", "1", "--family", "polynomial:1/2|40", "--formula", "thm1_lower", "--alphas", "2", "--fit-alphas", "0")
    assert code == 2
    code, _, _ = run(capsys, "seq", "--family", "polynomial:1/2", "--n", "5", "--precision-cap", "64")
    assert code == 1
    assert "SMALLGAPS_PRECISION_CAP" not in os.environ

    def boom(args):
        raise AmbiguityError("too close")

    monkeypatch.setitem(cli.COMMANDS, "seq", boom)
    code, _, err = run(capsys, "seq", "--family", "polynomial:2", "--n", "5")
    assert code == 3 and "precision" in err


def test_precision_cap_restored(capsys, monkeypatch):
    monkeypatch.setenv("SMALLGAPS_PRECISION_CAP", "512")
    run(capsys, "seq", "--family", "polynomial:1/2", "--n", "5", "--precision-cap", "4096")
    assert os.environ["SMALLGAPS_PRECISION_CAP"] == "512"


def test_schema(capsys):
    code, out, _ = run(capsys, "gaps", "--schema")
    data = json.loads(out)
    assert code == 0 and data["version"] == 1 and data["columns"]["csv"] == ["N", "alpha", "variant", "value", "m", "n"]
    for cmd in cli.COMMANDS:
        code, out, _ = run(capsys, cmd, "--schema")
        assert code == 0 and json.loads(out)["version"] == 1


def test_verify_determinism(capsys, tmp_path):
    argv = ["verify", "--seed", "5", "--families", "polynomial:2|80", "beatty:sqrt2|80", "--alphas", "5", "--fit-alphas", "0"]
    code, a, _ = run(capsys, *argv)
    code2, b, _ = run(capsys, *argv, "--threads", "3")
    assert code == code2 == 0 and a == b
    assert rows(a)[0] == ["family", "formula", "alpha", "mode", "N0_observed", "holds"]
    out = tmp_path / "camp"
    code, summary, _ = run(capsys, *argv, "--out", str(out))
    assert code == 0 and (out / "verdicts.csv").read_text() == a
    assert json.loads(summary) == json.loads((out / "summary.json").read_text())


def test_verify_config(capsys, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[campaign]\nseed = 3\nalphas = 3\nfit_alphas = 0\nfamilies = polynomial:2 | 60\nformulas = thm4_upper\n")
    code, out, _ = run(capsys, "verify", "--config", str(cfg))
    assert code == 0 and len(rows(out)) == 4
    cfg.write_text("[campaign]\nseed = 3\nnope = 1\n")
    code, _, _ = run(capsys, "verify", "--config", str(cfg))
    assert code == 1


def test_subcommand_config_defaults(capsys, tmp_path):
    cfg = tmp_path / "g.ini"
    cfg.write_text("[gaps]\nfamily = arithmetic:1,1\nn = 11\nalpha = 0.305\n")
    code, out, _ = run(capsys, "gaps", "--config", str(cfg))
    assert code == 0 and rows(out)[1][3] == "1/20"
    code, out, _ = run(capsys, "gaps", "--config", str(cfg), "--n", "3")
    assert rows(out)[1][0] == "3"
    cfg.write_text("[gaps]\nwhatever = 1\n")
    code, _, _ = run(capsys, "gaps", "--config", str(cfg))
    assert code == 64


def test_series(capsys):
    code, out, _ = run(capsys, "series", "--family", "arithmetic:1,1", "--n", "2001", "--eta", "power:2", "--K", "2000", "--B", "20", "--L", "1000", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "converges_suspected"
    code, out, _ = run(capsys, "series", "--family", "arithmetic:1,1", "--n", "50", "--eta", "power:2", "--K", "3", "--B", "5", "--L", "100")
    assert rows(out)[1] == ["1", repr(1 / 4), repr(1 / 4)]


def test_pairstats(capsys):
    code, out, _ = run(capsys, "pairstats", "--family", "arithmetic:1,1", "--n", "50", "--samples", "200", "--seed", "1")
    assert code == 0
    r = dict(zip(*rows(out)))
    assert float(r["mean_expected"]) == pytest.approx(50)
    code, out, _ = run(capsys, "pairstats", "--family", "arithmetic:1,1", "--n", "4", "--gcd", "3")
    assert rows(out)[0] == ["H", "gcd_sum", "ratio", "bound"] and len(rows(out)) == 4
    code, _, _ = run(capsys, "pairstats", "--family", "arithmetic:1,1", "--n", "4", "--gcd", "30")
    assert code == 1


def test_cover(capsys):
    code, out, _ = run(capsys, "cover", "--family", "arithmetic:1,1", "--n", "17", "--k", "4", "--report", "chung-erdos")
    assert code == 0 and json.loads(out)["holds"] is True
    code, out, _ = run(capsys, "cover", "--family", "arithmetic:1,1", "--n", "17", "--k", "4")
    assert code == 0 and rows(out)[0] == ["n", "Z", "measure", "bound", "ratio"]
    code, out, _ = run(capsys, "cover", "--family", "polynomial:2", "--n", "17", "--k", "4", "--report", "split")
    assert code == 0 and len(rows(out)) == 1 + 12
    code, out, _ = run(capsys, "cover", "--family", "polynomial:2", "--n", "17", "--k", "4", "--report", "overlap")
    assert code == 0 and json.loads(out)
    code, _, _ = run(capsys, "cover", "--family", "polynomial:2", "--n", "17", "--k", "3")
    assert code == 1


def test_out_file(capsys, tmp_path):
    path = tmp_path / "seq.csv"
    code, out, _ = run(capsys, "seq", "--family", "fibonacci", "--n", "4", "--out", str(path))
    assert code == 0 and out == "" and path.read_text() == "n,a_n\n1,1\n2,2\n3,3\n4,5\n"


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "smallgaps.cli", "diffset", "--family", "arithmetic:1,1", "--n", "3"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.splitlines()[-1] == "3,5,2,2,2,2,2"
