"""Command-line surface: exit codes, schemas, determinism, figure files."""

import json

import pytest
from click.testing import CliRunner

from coxstab.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def test_enumerate_a3(runner):
    result = runner.invoke(main, ["enumerate", "--family", "A", "--n", "3"])
    assert result.exit_code == 0
    doc = json.loads(result.stdout)
    assert doc["schema"] == 1
    assert doc["reports"][0]["data"]["order"] == 24


def test_enumerate_infinite_exit_3(runner):
    result = runner.invoke(
        main, ["enumerate", "--family", "I:7", "--n", "2", "--cap", "100000"]
    )
    assert result.exit_code == 3
    doc = json.loads(result.stdout)
    assert doc["error"] == "CapExceeded"


def test_cosets_drop_top(runner):
    result = runner.invoke(main, ["cosets", "--family", "A", "--n", "4", "--drop-top"])
    assert result.exit_code == 0
    doc = json.loads(result.stdout)
    assert doc["reports"][0]["data"]["index"] == 5


def test_homology_missing_input_exit_2(runner):
    result = runner.invoke(main, ["homology", "--in", "missing.json"])
    assert result.exit_code == 2


def test_complex_build_then_homology(runner, tmp_path):
    out = tmp_path / "b2.json"
    result = runner.invoke(
        main, ["complex", "build", "--family", "B", "--n", "2", "--out", str(out)]
    )
    assert result.exit_code == 0
    doc = json.loads(out.read_text())
    assert doc["vertices"] == 6
    assert len(doc["simplices"]["2"]) == 8
    result2 = runner.invoke(
        main, ["homology", "--in", str(out), "--coeff", "z", "--reduced"]
    )
    assert result2.exit_code == 0
    table = json.loads(result2.stdout)["reports"][0]["data"]["table"]
    assert table["degrees"]["2"]["rank"] == 1


def test_check_exit_codes(runner):
    ok = runner.invoke(main, ["check", "s3", "--family", "A", "--n", "2"])
    assert ok.exit_code == 0
    bad = runner.invoke(main, ["check", "nonsense", "--family", "A", "--n", "2"])
    assert bad.exit_code == 2


def test_check_all_a2(runner):
    result = runner.invoke(main, ["check", "all", "--family", "A", "--n", "2"])
    assert result.exit_code == 0, result.stdout
    doc = json.loads(result.stdout)
    assert doc["passed"] is True
    assert len(doc["reports"]) >= 9


def test_check_basic_trace_writes_csv_and_figure(runner, tmp_path):
    out = tmp_path / "basic.json"
    result = runner.invoke(
        main,
        ["check", "basic", "--family", "A", "--n", "2", "--trace", "--out", str(out)],
    )
    assert result.exit_code == 0
    assert (tmp_path / "basic.csv").exists()
    assert (tmp_path / "basic.png").exists()
    rows = (tmp_path / "basic.csv").read_text().strip().splitlines()
    assert rows[0].startswith("m,element,in_size,type")
    assert len(rows) == 6  # header + 5 attachment steps


def test_dn_build(runner, tmp_path):
    out = tmp_path / "dn.json"
    result = runner.invoke(
        main, ["dn", "build", "--family", "A", "--n", "2", "--out", str(out)]
    )
    assert result.exit_code == 0
    doc = json.loads(out.read_text())
    assert doc["levels"] == [3, 6, 6]
    assert doc["face_identity"].startswith("d_i d_j")


def test_stability_table_csv_and_figure(runner, tmp_path):
    out = tmp_path / "table.csv"
    result = runner.invoke(
        main,
        ["stability", "table", "--family", "A", "--nmax", "2", "--maxdeg", "1",
         "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "family,m,l,dim,map_rank,verdict"
    assert out.with_suffix(".png").exists()


def test_stability_ss_json(runner, tmp_path):
    out = tmp_path / "ss.json"
    result = runner.invoke(
        main,
        ["stability", "ss", "--family", "A", "--n", "2", "--maxdeg", "1",
         "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    doc = json.loads(out.read_text())
    assert doc["passed"] is True
    assert out.with_suffix(".png").exists()


def test_determinism_byte_identical(runner, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for path in (a, b):
        result = runner.invoke(
            main, ["check", "s3", "--family", "B", "--n", "2", "--out", str(path)]
        )
        assert result.exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_campaign_empty_config(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{}")
    result = runner.invoke(
        main, ["campaign", "--config", str(cfg), "--out-dir", str(tmp_path / "out")]
    )
    assert result.exit_code == 0
    assert (tmp_path / "out" / "summary.csv").exists()


def test_campaign_mixed_jobs(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "jobs": [
            {"kind": "check", "check": "s3", "family": "A", "n": 2},
            {"kind": "enumerate", "family": "I:7", "n": 2, "cap": 5000},
            {"kind": "cosets", "family": "I:7", "n": 2, "cap": 2000},
            {"kind": "cosets", "family": "A", "n": 4},
        ]
    }))
    outdir = tmp_path / "out"
    result = runner.invoke(
        main, ["campaign", "--config", str(cfg), "--out-dir", str(outdir)]
    )
    assert result.exit_code == 0, result.output
    doc = json.loads(result.stdout)
    statuses = [row["status"] for row in doc["rows"]]
    assert statuses == ["pass", "budget-exceeded", "budget-exceeded", "pass"]
    summary = (outdir / "summary.csv").read_text()
    assert "budget-exceeded" in summary


def test_family_file_input(runner, tmp_path):
    fam = tmp_path / "fam.txt"
    fam.write_text("vertices a b\nedge a b 5\npreferred b\n")
    result = runner.invoke(
        main, ["enumerate", "--family", f"file:{fam}", "--n", "1"]
    )
    assert result.exit_code == 0
    assert json.loads(result.stdout)["reports"][0]["data"]["order"] == 10
