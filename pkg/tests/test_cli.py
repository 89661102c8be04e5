import json
import math

import pytest

from orcas import cli, formats
from orcas.designer import db_to_linear, design
from orcas.polar import construct_polar


def run(argv, capsys):
    rc = cli.main(argv)
    out, err = capsys.readouterr()
    return rc, out, err


@pytest.mark.parametrize("cmd", ["design", "analyze", "simulate", "weights", "polar", "bench"])
def test_help(cmd):
    with pytest.raises(SystemExit) as exc:
        cli.main([cmd, "--help"])
    assert exc.value.code == 0


def test_weights(capsys):
    rc, out, _ = run(["weights", "12", "3"], capsys)
    assert rc == 0 and out.strip() == "A_6=2 A_7=4 A_8=1"
    rc, out, _ = run(["weights", "12", "3", "--all"], capsys)
    assert out.split()[0] == "A_0=1" and len(out.split()) == 13
    rc, _, err = run(["weights", "12", "40"], capsys)
    assert rc == 2 and "error" in err


def test_weights_dual(capsys):
    rc, out, _ = run(["weights", "7", "4", "--dual"], capsys)
    assert rc == 0 and out.strip() == "A_3=7 A_4=7 A_7=1"


def test_design_usage_errors(capsys):
    assert run(["design", "11", "5"], capsys)[0] == 2
    assert run(["design", "12", "13"], capsys)[0] == 2


def test_design_search_error(capsys):
    # already met at the lower bracket edge
    rc, _, err = run(["design", "2", "1", "--target-bler", "0.5"], capsys)
    assert rc == 3 and "error" in err


def test_design_k0(tmp_path, capsys):
    path = tmp_path / "z.json"
    rc, out, _ = run(["design", "12", "0", "--out", str(path)], capsys)
    assert rc == 0 and "n/a" in out
    assert json.loads(path.read_text())["design_snr_db"] is None
    rc, out, _ = run(["analyze", str(path), "--ebn0-db", "0,5"], capsys)
    assert out.splitlines()[1:] == ["0.0,0.0", "5.0,0.0"]


def test_design_fixed_snr_matches_library(tmp_path, capsys):
    path = tmp_path / "p.json"
    rc, out, _ = run(["design", "24", "12", "--design-snr-db", "2.0", "--out", str(path)], capsys)
    assert rc == 0 and out.startswith("# design Es/N0 = 2.0000 dB")
    obj = formats.load(path)
    assert obj.profile == design(24, 12, db_to_linear(2.0))
    assert obj.design_snr_db == 2.0


def test_profile_round_trip(tmp_path, capsys):
    path = tmp_path / "p.json"
    run(["design", "48", "24", "--out", str(path)], capsys)
    text = path.read_text()
    assert formats.dumps(formats.load(path)) == text
    d = json.loads(text)
    assert d["family"] == "orcas" and d["n"] == 48 and d["k"] == 24


def test_malformed_profile(tmp_path, capsys):
    path = tmp_path / "p.json"
    run(["design", "24", "12", "--design-snr-db", "2", "--out", str(path)], capsys)
    d = json.loads(path.read_text())
    d["rate_profile"] = "1" + d["rate_profile"][1:] if d["rate_profile"][0] == "0" else "0" + d["rate_profile"][1:]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    rc, _, err = run(["analyze", str(bad), "--ebn0-db", "1"], capsys)
    assert rc == 2 and "checksum" in err
    bad.write_text("{not json")
    assert run(["analyze", str(bad), "--ebn0-db", "1"], capsys)[0] == 2
    assert run(["analyze", str(tmp_path / "missing.json"), "--ebn0-db", "1"], capsys)[0] == 2


def test_analyze_monotone(tmp_path, capsys):
    path = tmp_path / "p.json"
    run(["design", "96", "48", "--design-snr-db", "3.0957", "--out", str(path)], capsys)
    rc, out, _ = run(["analyze", str(path), "--ebn0-db", "0:0.5:5"], capsys)
    lines = out.splitlines()
    assert rc == 0 and lines[0] == "eb_n0_db,bler_analytic" and len(lines) == 12
    vals = [float(l.split(",")[1]) for l in lines[1:]]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert lines[-1].startswith("5.0,")


def test_simulate_deterministic(tmp_path, capsys):
    path = tmp_path / "p.json"
    run(["design", "24", "12", "--design-snr-db", "2", "--out", str(path)], capsys)
    args = ["simulate", str(path), "--ebn0-db", "1,2", "--seed", "9", "--min-errors", "20",
            "--max-frames", "5000", "--no-timing"]
    outs = [run(args + ["--out", str(tmp_path / f"r{i}.csv")], capsys)[0] for i in range(2)]
    assert outs == [0, 0]
    a, b = (tmp_path / "r0.csv").read_bytes(), (tmp_path / "r1.csv").read_bytes()
    assert a == b
    lines = a.decode().splitlines()
    assert lines[0] == ",".join(formats.RESULT_COLUMNS)
    row = lines[1].split(",")
    assert row[0] == "orcas-24-12" and row[1] == "1.0" and row[6] == "" and row[7] == "9"
    assert int(row[3]) >= 20


def test_polar_command(tmp_path, capsys):
    path = tmp_path / "pol.json"
    rc, out, _ = run(["polar", "96", "24", "--matching", "puncture-bitrev", "--design-snr-db", "0",
                      "--out", str(path)], capsys)
    assert rc == 0 and out.startswith("# polar-96-24-puncture-bitrev mother length 128")
    spec = formats.load(path)
    assert spec == construct_polar(96, 24, 1.0, "puncture", "bitrev")
    assert formats.dumps(spec) == path.read_text()
    rc, out, _ = run(["analyze", str(path), "--ebn0-db", "2"], capsys)
    assert rc == 0 and 0 < float(out.splitlines()[1].split(",")[1]) < 1


def test_polar_auto_matching(capsys):
    assert cli.default_matching(96, 48) == ("shorten", "natural")
    assert cli.default_matching(640, 160) == ("puncture", "natural")
    assert cli.default_matching(128, 64) == ("none", "natural")
    assert run(["polar", "100", "50"], capsys)[0] == 2


def test_bench(tmp_path, capsys):
    path = tmp_path / "p.json"
    run(["design", "24", "12", "--design-snr-db", "2", "--out", str(path)], capsys)
    rc, out, _ = run(["bench", str(path), "--duration", "0.05", "--batch", "100"], capsys)
    assert rc == 0 and out.startswith("orcas-24-12\t")
    assert float(out.split("\t")[1].split()[0]) > 0


@pytest.mark.parametrize("text,expected", [
    ("0:0.5:1", [0.0, 0.5, 1.0]),
    ("1,2.5", [1.0, 2.5]),
    ("3", [3.0]),
    ("0:0.1:0.3", [0.0, 0.1, 0.2, 0.3]),
])
def test_parse_range(text, expected):
    assert formats.parse_range(text) == expected


@pytest.mark.parametrize("text", ["1:2", "0:-1:3", "3:1:0", "a"])
def test_parse_range_errors(text):
    with pytest.raises(ValueError):
        formats.parse_range(text)


def test_fmt_float():
    assert formats.fmt_float(0.1 + 0.2) == "0.3"
    assert not math.isnan(float(formats.fmt_float(1e-7)))
