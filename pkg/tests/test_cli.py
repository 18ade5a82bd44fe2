import csv
import json

import jsonschema
import pytest

from rif_forge.cli import main, parse_lambda, report_schema
from rif_forge.gaussian import gr


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_catalog_listing(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0
    assert "ex_iso1" in out and "(1,1,1)" in out


def test_catalog_json(capsys):
    code, out, _ = run(capsys, "catalog", "--json")
    entries = json.loads(out)
    assert code == 0 and len(entries) == 9
    iso = next(e for e in entries if e["name"] == "ex_iso1")
    assert iso["degree"] == [1, 1, 1]


def test_unknown_command_is_usage_error(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and "usage" in err


def test_unknown_example_is_usage_error(capsys):
    code, _, err = run(capsys, "scan", "ex_nothing")
    assert code == 2 and "unknown example" in err


def test_boundary_command(capsys):
    code, out, _ = run(capsys, "ex_iso1", "boundary", "--point", "0,0,1.3", "--json")
    d = json.loads(out)
    assert code == 0 and d["case"] == "B"
    assert d["value"] == pytest.approx([-1, 0], abs=1e-12)
    code, out, _ = run(capsys, "ex_curve2", "boundary", "--point", "0,0,pi", "--json")
    assert json.loads(out)["case"] == "C2"


def test_boundary_requires_point(capsys):
    code, _, err = run(capsys, "boundary", "ex_iso1")
    assert code == 2 and "--point" in err


def test_newton_command(capsys):
    code, out, _ = run(capsys, "newton", "ex_iso1", "--center", "0,0", "--json")
    d = json.loads(out)
    assert code == 0 and d["diagonal_hit"]["delta"] == 1
    assert d["verdict"] == {"kind": "sharp", "epsilon": 1, "case": "a"}
    code, out, _ = run(capsys, "newton", "ex_lifted", "--center", "0,0", "--json")
    assert json.loads(out)["verdict"]["kind"] == "nonsharp_case_b"


def test_newton_vertical_line_exit_five(capsys):
    code, _, err = run(capsys, "newton", "ex_vl2", "--center", "0,0")
    assert code == 5 and "vertical line" in err


def test_scan_command(capsys):
    code, out, _ = run(capsys, "ex_curve", "scan", "--json")
    d = json.loads(out)
    assert code == 0
    assert [c["dimension"] for c in d["components"]] == [1, 1, 1]


def test_unstable_poly_file_exit_four(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps({"nvars": 3, "degree": [1, 1, 1], "denominator": "1 - 2*z1 + z3"}))
    code, _, err = run(capsys, "analyze", "--poly", str(f))
    assert code == 4 and "witness" in err


def test_poly_file_accepted(tmp_path, capsys):
    f = tmp_path / "iso.json"
    f.write_text(json.dumps({"nvars": 3, "degree": [1, 1, 1], "denominator": "3 - z1 - z2 - z3"}))
    code, out, _ = run(capsys, "boundary", str(f), "--point", "0,0,0", "--json")
    assert code == 0 and json.loads(out)["case"] == "B"


def test_parse_lambda_forms():
    assert parse_lambda("1") == 1
    assert parse_lambda("-i") == gr(0, -1)
    assert parse_lambda("0.6+0.8i") == gr(3, 4) / 5
    assert complex(parse_lambda("@pi/3")) == pytest.approx(complex(0.5, 3 ** 0.5 / 2))


def test_levelset_csv_dump(tmp_path, capsys):
    code, out, _ = run(capsys, "levelset", "ex_curve", "--lambda", "i", "--lambda", "-1",
                       "--levelset-grid", "32", "--csv-dir", str(tmp_path), "--json")
    summaries = json.loads(out)
    assert code == 0 and len(summaries) == 2
    assert all(s["verify"]["passed"] for s in summaries)
    files = sorted(tmp_path.glob("*.csv"))
    assert len(files) == 2
    with open(files[0]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["theta1", "theta2", "theta3", "kind"]


def test_analyze_schema_valid(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "analyze", "ex_iso1", "--var", "3", "--samples", "20000",
                     "--lambda-count", "2", "--levelset-grid", "32", "--json", str(out))
    report = json.loads(out.read_text())
    jsonschema.validate(report, report_schema())
    assert code in (0, 3)
    assert report["integrability"][0]["variable"] == 3
    newton = report["newton"][0]["report"]
    assert newton["verdict"]["kind"] == "sharp" and newton["verdict"]["epsilon"] == 1


def test_analyze_vertical_line_model_schema_valid(tmp_path, capsys):
    out = tmp_path / "report.json"
    run(capsys, "analyze", "ex_vl1", "--var", "1", "--samples", "20000",
        "--lambda-count", "2", "--levelset-grid", "32", "--json", str(out))
    jsonschema.validate(json.loads(out.read_text()), report_schema())


@pytest.mark.parametrize("threads", ["1", "3"])
def test_integrability_reproducible_across_threads(capsys, threads):
    args = ["integrability", "ex_iso1", "--var", "3", "--samples", "30000", "--seed", "7",
            "--json"]
    _, base, _ = run(capsys, *args, "--threads", "1")
    _, other, _ = run(capsys, *args, "--threads", threads)
    a, b = json.loads(base), json.loads(other)
    for d in (a, b):
        d.pop("seconds")
    assert a == b


def test_integrability_needs_var(capsys):
    code, _, err = run(capsys, "integrability", "ex_iso1")
    assert code == 2 and "--var" in err
