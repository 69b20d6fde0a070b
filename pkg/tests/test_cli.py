import csv
import json

import pytest

from betafreq import precision
from betafreq.cli import main


@pytest.fixture(autouse=True)
def restore_precision():
    saved = precision.DEFAULT_PRECISION
    yield
    precision.DEFAULT_PRECISION = saved


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_beta_n(capsys):
    code, out, _ = run(capsys, "solve", "--beta-n", "5", "--decimals", "3")
    assert code == 0 and "1.285" in out


def test_solve_golden_and_root(capsys):
    assert "= 2" in run(capsys, "solve", "--golden", "2", "--decimals", "0")[1]
    code, out, _ = run(capsys, "solve", "--root", "1,-1,-2,1", "--decimals", "5", "--json")
    assert code == 0 and json.loads(out)["value"] == "1.80194"


def test_solve_bad_root_is_a_validation_error(capsys):
    code, _, err = run(capsys, "solve", "--root", "1,0,1")
    assert code == 2 and "error" in err


def test_table_csv_and_plot(capsys, tmp_path):
    png = tmp_path / "t.png"
    code, out, _ = run(capsys, "table", "--plot", str(png))
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert [r["beta_n"] for r in rows] == ["1.618", "1.466", "1.380", "1.325", "1.285", "1.184", "1.098", "1.058", "1.034"]
    assert {r["n"] for r in rows if r["flag"]} == {"10", "25"}
    assert png.stat().st_size > 0


def test_table_m1_and_json(capsys):
    code, out, _ = run(capsys, "table", "--M", "1", "--ns", "1,2", "--format", "json")
    assert code == 0
    assert [r["upper_bound"] for r in json.loads(out)] == ["1.618", "1.618"]


def test_table_empty_list(capsys):
    assert run(capsys, "table", "--ns", "")[0] == 2


def test_synth_analyze_validate_round_trip(capsys, tmp_path):
    art = tmp_path / "a.json"
    png = tmp_path / "a.png"
    code, out, _ = run(
        capsys, "synth", "--M", "1", "--n", "1", "--beta", "1.5", "--x", "1", "--target", "1/2,1/2",
        "--digits", "20000", "--output", str(art), "--plot", str(png),
    )
    assert code == 0
    summary = json.loads(out)
    assert float(summary["sup_error"][0]) <= 0.05
    assert png.stat().st_size > 0
    csv_path = tmp_path / "f.csv"
    code, out, _ = run(
        capsys, "analyze", "--artifact", str(art), "--q", "0.8,0.15,0.05", "--beta", "1.28", "--bound-n", "5",
        "--csv", str(csv_path),
    )
    assert code == 0
    report = json.loads(out)
    assert report["corollary_dim_bound"].startswith("2.034")
    assert float(report["sup_error"][0]) <= 0.05
    assert csv_path.read_text().startswith("N,freq_0,freq_1")
    code, out, _ = run(capsys, "oracle", "--validate", str(art))
    assert code == 0 and json.loads(out)["ok"]


def test_validation_failure_exit_code(capsys, tmp_path):
    art = tmp_path / "a.json"
    run(capsys, "synth", "--M", "1", "--beta", "1.5", "--x", "1", "--target", "1/2,1/2", "--digits", "3000", "--output", str(art))
    obj = json.loads(art.read_text())
    chunk = obj["digits"]["chunks"][0]
    obj["digits"]["chunks"][0] = chunk[:1500] + ("0" if chunk[1500] == "1" else "1") + chunk[1501:]
    art.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "oracle", "--validate", str(art))
    assert code == 2 and not json.loads(out)["ok"]


def test_oscillate(capsys, tmp_path):
    art = tmp_path / "o.json"
    code, out, _ = run(
        capsys, "oscillate", "--M", "2", "--n", "2", "--beta", "auto:0.01", "--x", "1", "--D", "0,1",
        "--fixed", "2=1/2", "--digits", "10000", "--output", str(art),
    )
    assert code == 0
    assert len(json.loads(out)["targets"]) == 2


def test_oscillate_infeasible(capsys, tmp_path):
    code, _, _ = run(
        capsys, "oscillate", "--M", "2", "--n", "1", "--beta", "1.5", "--x", "1", "--D", "0,1", "--fixed", "2=0",
        "--output", str(tmp_path / "o.json"),
    )
    assert code == 4


def test_oracle_counts(capsys):
    code, out, _ = run(capsys, "oracle", "--x", "0", "--depth", "10")
    assert code == 0 and json.loads(out) == {"depth_counts": [1] * 10, "violations": []}
    code, out, _ = run(capsys, "oracle", "--M", "2", "--n", "2", "--x", "top", "--depth", "8")
    assert json.loads(out)["depth_counts"] == [1] * 8


def test_precision_errors_exit_3(capsys):
    code, _, _ = run(capsys, "oracle", "--x", "1", "--depth", "40")
    assert code == 3


def test_unvalidated_beta_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "synth", "--beta", "1.7", "--x", "1", "--target", "1/2,1/2", "--output", str(tmp_path / "a.json"))
    assert code == 2 and "beta_n" in err


def test_precision_flag(capsys):
    code, _, _ = run(capsys, "--precision", "256", "solve", "--beta-n", "2")
    assert code == 0
    assert precision.DEFAULT_PRECISION == 256
