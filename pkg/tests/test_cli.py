import csv
import io

import numpy as np
import pytest

from srff.cli import main, validate_rule
from srff.io import REPORT_COLUMNS, read_rule
from srff.radial import gauss_laguerre


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_quad_radial_example(tmp_path, capsys):
    path = tmp_path / "r.txt"
    code, _, _ = run(["quad", "--radial", "--d", "4", "--mr", "1", "--out", str(path)], capsys)
    assert code == 0
    assert "node 2 weight 1" in path.read_text().splitlines()
    assert read_rule(path) == gauss_laguerre(4, 1)


def test_quad_divisibility_is_usage_error(capsys):
    code, _, err = run(["quad", "--spherical", "--kind", "omc", "--d", "4", "--ms", "6"], capsys)
    assert code == 1 and "multiple of d=4" in err


def test_quad_spherical_okq_stdout(capsys):
    code, out, _ = run(["quad", "--spherical", "--d", "3", "--ms", "6", "--okq"], capsys)
    assert code == 0 and "kind okq base omc bandwidth 1" in out


def test_usage_errors(capsys):
    assert run(["nonsense"], capsys)[0] == 1
    assert run(["quad", "--radial", "--d", "4"], capsys)[0] == 1
    assert run(["approx", "--ms", "4"], capsys)[0] == 1
    assert run(["approx", "--d", "4", "--ms", "4", "--methods", "nystrom"], capsys)[0] == 1
    assert run(["approx", "--d", "4", "--ms", "4", "--seeds", "1,1"], capsys)[0] == 1


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,oops\n")
    code, _, err = run(["approx", "--data", f"csv:{bad}", "--ms", "2"], capsys)
    assert code == 2 and "row 2, column 2" in err
    good = tmp_path / "good.csv"
    good.write_text("1,2\n3,4\n5,7\n")
    code, _, err = run(["approx", "--data", f"csv:{good}", "--d", "3", "--ms", "3"], capsys)
    assert code == 2 and "dimension" in err


def _rows(text):
    lines = text.splitlines()
    assert lines[0] == "# srff-report v1"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_approx_exact_and_schema(capsys):
    code, out, _ = run(["approx", "--d", "3", "--n", "60", "--methods", "exact,SR_OMC,RFF,ORF,QMC",
                        "--mr", "1", "--ms", "3,6", "--seeds", "0,1"], capsys)
    assert code == 0
    rows = _rows(out)
    assert list(rows[0]) == list(REPORT_COLUMNS)
    assert len(rows) == 5 * 2 * 2
    assert all(float(r["rel_frobenius"]) == 0.0 for r in rows if r["method"] == "EXACT")
    assert all(r["bound_thm2"] for r in rows if r["method"] == "SR_OMC")


def test_approx_csv_input_and_file_output(tmp_path, capsys):
    assert run(["dataset", "gen", "--kind", "sphere", "--n", "40", "--d", "3", "--radius", "2",
                "--out", str(tmp_path / "s.csv")], capsys)[0] == 0
    out = tmp_path / "rep.csv"
    code, _, _ = run(["approx", "--data", f"csv:{tmp_path / 's.csv'}", "--sigma", "1.5",
                      "--ms", "6", "--methods", "SR_SOMC", "--out", str(out), "--with-timing"], capsys)
    assert code == 0
    rows = _rows(out.read_text())
    assert rows[0]["sigma"] == "1.5" and float(rows[0]["wall_time"]) > 0


def test_approx_deterministic_across_threads(capsys, monkeypatch):
    args = ["approx", "--d", "4", "--n", "120", "--methods", "SR_OMC,SR_OKQ_OMC,RFF,ORF",
            "--mr", "1,2", "--ms", "4,8", "--seeds", "0,1,2", "--spectral",
            "--replications", "100"]
    a = run(args + ["--threads", "1"], capsys)[1]
    monkeypatch.setenv("SRFF_THREADS", "3")
    b = run(args, capsys)[1]
    assert a == b


def test_approx_sweep_decreasing_trend(capsys):
    from scipy.stats import spearmanr
    ms = [4, 8, 16, 32, 64, 128]
    code, out, _ = run(["approx", "--d", "4", "--n", "1000", "--methods", "SR_OMC", "--mr", "2",
                        "--ms", ",".join(map(str, ms)), "--seeds", "0"], capsys)
    assert code == 0
    errs = [float(r["rel_frobenius"]) for r in _rows(out)]
    assert spearmanr(ms, errs).statistic < -0.9


def test_bounds_table(capsys):
    code, out, _ = run(["bounds", "--d", "4", "--mr", "1,2", "--ms", "4,8,16", "--c", "0,0.4"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 12
    for r in rows:
        c, M_R, d = float(r["c"]), int(r["M_R"]), int(r["d"])
        if c == 0:
            assert float(r["bound_thm1"]) == 0 and float(r["bound_thm2"]) == 0
        else:
            A = (4 * M_R + d) / (d - 1)
            assert float(r["ratio_omc_mc"]) == pytest.approx(A**2 * c**4 / 4, rel=1e-12)
    b1 = [float(r["bound_thm1"]) for r in rows if r["c"] == "0.40000000000000002" and r["M_R"] == "1"]
    assert b1 == sorted(b1, reverse=True) and len(b1) == 3


def test_verify_subset_and_rule(tmp_path, capsys):
    code, out, _ = run(["verify", "--only", "1,8"], capsys)
    assert code == 0 and out.count("[PASS]") == 2 and "budget" in out
    rule = tmp_path / "rule.txt"
    run(["quad", "--spherical", "--d", "4", "--ms", "8", "--out", str(rule)], capsys)
    assert run(["verify", "--rule", str(rule)], capsys)[0] == 0
    lines = rule.read_text().splitlines()
    lines[5] = lines[5].replace("node ", "node 0.3", 1)
    rule.write_text("\n".join(lines) + "\n")
    code, out, _ = run(["verify", "--rule", str(rule)], capsys)
    assert code == 3 and "[FAIL] rule file" in out
    rule.write_text("srff-rule v1\ntype radial\nd 4\nnode 2 weight one\n")
    code, out, _ = run(["verify", "--rule", str(rule)], capsys)
    assert code == 3 and "line 4" in out
    assert run(["verify", "--only", "42"], capsys)[0] == 1


def test_validate_rule_detects_wrong_radial_rule():
    from srff.io import loads_rule, dumps_rule
    text = dumps_rule(gauss_laguerre(4, 2)).replace("weight 0.", "weight 0.1", 1)
    assert validate_rule(loads_rule(text))
