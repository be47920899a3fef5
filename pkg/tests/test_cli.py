import json

import pytest
from mpmath import mpf

from jpvi import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sigma_check_grid(capsys):
    code, out, _ = run(capsys, "sigma-check", "--n", "3", "--alpha", "1.5", "--beta", "0.5",
                       "--A", "1", "--B", "1", "--t-grid", "0.1:0.9:17", "--prec", "256",
                       "--tol", "1e-18", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["records"]) == 17
    assert doc["records"][0]["t"] == "0.1" and doc["records"][-1]["t"] == "0.9"
    assert mpf(doc["worst"]["residual"]) <= mpf("1e-18")
    assert doc["params"]["n"] == 3


def test_gap_value(capsys):
    code, out, _ = run(capsys, "gap", "--n", "1", "--alpha", "1", "--beta", "1", "--t", "0.5")
    assert code == 0
    rec = json.loads(out)["records"][0]
    assert abs(mpf(rec["prob"]) - mpf("0.5")) < mpf("1e-60")


def test_missing_n(capsys):
    code, _, err = run(capsys, "gap", "--alpha", "1", "--beta", "1")
    assert code == 2
    assert "--n" in err


@pytest.mark.parametrize("argv", [
    ("gap", "--n", "1", "--alpha", "1", "--beta", "1", "--t", "1.5"),
    ("gap", "--n", "1", "--alpha", "-1", "--beta", "1", "--t", "0.5"),
    ("gap", "--n", "1", "--alpha", "x", "--beta", "1"),
    ("gap", "--n", "1", "--alpha", "1", "--beta", "1", "--t-grid", "0.1:0.9"),
    ("gap", "--n", "1", "--alpha", "1", "--beta", "1", "--prec", "16"),
    ("moments", "--n", "2", "--alpha", "1", "--beta", "1", "--A", "0", "--B", "0"),
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_residual_over_tolerance_exits_one(capsys):
    code, out, err = run(capsys, "identities", "--n", "2", "--alpha", "1", "--beta", "1",
                         "--A", "1", "--B", "1", "--t", "0.5")
    assert code == 1
    assert "sum_R_minus_x" in err
    doc = json.loads(out)
    assert doc["records"][0]["worst_tag"] == "sum_R_minus_x"


def test_identities_prints_tag_table(capsys):
    _, _, err = run(capsys, "identities", "--n", "2", "--alpha", "1", "--beta", "1", "--t", "0.5")
    assert "s1_residue_t" in err and "r_from_x" in err


def test_deterministic(capsys):
    argv = ("moments", "--n", "2", "--alpha", "0.1", "--beta", "2", "--A", "1", "--B", "1",
            "--t-list", "0.2,0.7")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0


def test_csv_matches_json(capsys):
    base = ("gap", "--n", "2", "--alpha", "1.5", "--beta", "0.5", "--t-grid", "0.2:0.8:4")
    _, js, _ = run(capsys, *base)
    _, cs, _ = run(capsys, *base, "--format", "csv")
    records = json.loads(js)["records"]
    lines = cs.strip().split("\n")
    header = lines[0].split(",")
    assert header == list(records[0])
    for line, rec in zip(lines[1:], records):
        assert line.split(",") == [rec[k] for k in header]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "gap.json"
    code, out, _ = run(capsys, "gap", "--n", "1", "--alpha", "1", "--beta", "1", "--t", "0.9",
                       "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["subcommand"] == "gap"


def test_parallel_workers_keep_order(capsys):
    base = ("sigma-check", "--n", "2", "--alpha", "1", "--beta", "1", "--A", "1", "--B", "1",
            "--t-grid", "0.1:0.9:5")
    serial = run(capsys, *base)
    parallel = run(capsys, *base, "--jobs", "2")
    assert serial == parallel


def test_asymptotics(capsys):
    code, out, _ = run(capsys, "asymptotics", "--n", "1", "--alpha", "1", "--beta", "1")
    assert code == 0
    rec = json.loads(out)["records"][0]
    assert abs(mpf(rec["C"]) - 3) < mpf("1e-60")


def test_pvi_compare_short_grid(capsys):
    code, out, _ = run(capsys, "pvi-compare", "--n", "2", "--alpha", "1", "--beta", "1",
                       "--t-grid", "0.1:0.3:3", "--prec", "192")
    assert code == 0
    assert len(json.loads(out)["records"]) == 3


def test_grid_parsing():
    assert cli.parse_grid("0.1:0.9:5", 256) == ("0.1", "0.3", "0.5", "0.7", "0.9")
    assert cli.parse_grid("0.25:0.5:1", 256) == ("0.25",)
