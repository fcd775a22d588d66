import csv
import io
import json
import shutil
import subprocess

import pytest
from hypothesis import given, strategies as st

from zetamellin.cli import (EXIT_FAIL, EXIT_PASS, EXIT_USAGE, RECORD_FIELDS, ConfigError,
                            exit_status, main, parse_grid)
from zetamellin.mellin import IdentityId
from zetamellin.residues import ORACLE, PAPER
from zetamellin.verify import VerificationRecord

NUMERIC = ("lhs", "rhs", "abs_err", "rel_err", "tol", "lhs_quad_err", "rhs_quad_err")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_grid():
    assert parse_grid("0.2:0.8:4") == pytest.approx((0.2, 0.4, 0.6, 0.8))
    assert parse_grid("0.3,0.5") == (0.3, 0.5)
    assert parse_grid("0.5") == (0.5,)
    assert parse_grid("0.5:0.9:1") == (0.5,)
    for bad in ("a:b:3", "0:1:0", "x"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_kernel_suite_exit_zero(capsys):
    code, out, _ = run(capsys, "verify", "--id", "eq1.4", "--s", "0.2:0.8:5", "--tol", "1e-6")
    assert code == EXIT_PASS
    report = json.loads(out)
    assert len(report["records"]) == 5
    assert report["meta"]["summary"] == {"records": 5, "passed": 5, "failed": 0}


def test_out_of_strip_is_usage_error(capsys):
    code, out, err = run(capsys, "verify", "--id", "eq1.4", "--s", "1.5")
    assert code == EXIT_USAGE and out == ""
    assert "s outside critical strip" in err


def test_bad_flag_values(capsys):
    assert run(capsys, "verify", "--id", "eq1.4", "--workers", "0")[0] == EXIT_USAGE
    assert run(capsys, "verify", "--id", "eq1.4", "--tol", "2")[0] == EXIT_USAGE
    assert run(capsys, "verify", "--id", "ps1", "--x", "1.5")[0] == EXIT_USAGE
    assert run(capsys, "verify")[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--id", "eq7"])
    assert exc.value.code == EXIT_USAGE


@pytest.mark.slow
def test_both_conventions_csv(capsys):
    code, out, _ = run(capsys, "verify", "--id", "eq1.2", "--convention", "both",
                       "--s", "0.3,0.5,0.7", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0]) == RECORD_FIELDS
    blocks = {c: [r for r in rows if r["convention"] == c] for c in (PAPER, ORACLE)}
    assert all(len(b) == 3 for b in blocks.values())
    fully = [c for c, b in blocks.items() if all(r["pass"] == "True" for r in b)]
    assert fully == [ORACLE]
    assert code == EXIT_FAIL


def test_schema_totality(capsys):
    _, out, _ = run(capsys, "verify", "--id", "eq1.1", "--id", "ps1", "--x", "0.2,0.7")
    for rec in json.loads(out)["records"]:
        assert set(RECORD_FIELDS) <= set(rec)
        assert rec["error"] is None
        assert all(isinstance(rec[k], float) for k in NUMERIC)
        assert rec["convention"] in (PAPER, ORACLE)


def test_reports_identical_across_worker_counts(tmp_path, capsys):
    paths = []
    for workers in ("1", "2"):
        p = tmp_path / f"r{workers}.json"
        code = main(["verify", "--id", "eq1.5", "--id", "ps2", "--s", "0.3,0.6",
                     "--x", "0.2,0.5", "--workers", workers, "--out", str(p)])
        assert code == EXIT_PASS
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    meta = json.loads(paths[0].read_text())["meta"]
    assert "workers" not in meta["config"]
    assert meta["resolved_signs"]["ps2/paper-printed"]["sigma"] == -1


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"ids": ["eq1.4"], "s_grid": "0.3,0.4", "tol": 1e-6,
                               "format": "csv", "quadrature": {"abs_tol": 1e-11}}))
    code, out, _ = run(capsys, "verify", "--config", str(cfg))
    assert code == EXIT_PASS and out.startswith("id,point,")
    # Flags override the file.
    code, out, _ = run(capsys, "verify", "--config", str(cfg), "--format", "json")
    assert json.loads(out)["meta"]["config"]["quadrature"]["abs_tol"] == 1e-11
    cfg.write_text(json.dumps({"ids": ["eq1.4"], "colour": "red"}))
    code, _, err = run(capsys, "verify", "--config", str(cfg))
    assert code == EXIT_USAGE and "colour" in err
    code, _, _ = run(capsys, "verify", "--config", str(tmp_path / "missing.json"))
    assert code == EXIT_USAGE


def test_eval_examples(capsys):
    code, out, _ = run(capsys, "eval", "zeta", "--s", "0.5")
    assert code == EXIT_PASS and "-1.46035450880959" in out
    code, out, _ = run(capsys, "eval", "xi", "--t", "0")
    assert "0.497120778188315" in out
    code, out, err = run(capsys, "eval", "lambda1", "--x", "2.0", "--convention", "oracle")
    assert code == EXIT_PASS and err == ""
    assert "nan" not in out and "inf" not in out
    line = run(capsys, "eval", "digamma", "--x", "1")[1]
    assert float(line.split("=")[1].split()[0]) == pytest.approx(-0.5772156649015329, rel=1e-14)
    line = run(capsys, "eval", "stieltjes", "--n", "1")[1]
    assert float(line.split("=")[1].split()[0]) == pytest.approx(-0.0728158454836767, abs=1e-13)


def test_eval_domain_errors(capsys):
    assert run(capsys, "eval", "zeta", "--s", "1")[0] == EXIT_USAGE
    assert run(capsys, "eval", "lambda1", "--x", "-1")[0] == EXIT_USAGE
    assert run(capsys, "eval", "zeta")[0] == EXIT_USAGE
    assert run(capsys, "eval", "xi", "--t", "abc")[0] == EXIT_USAGE


@pytest.mark.slow
def test_resolve_report(tmp_path, capsys):
    out = tmp_path / "resolve.json"
    assert main(["resolve", "--out", str(out)]) == EXIT_PASS
    rep = json.loads(out.read_text())
    lam1 = rep["polynomials"]["lambda1"]
    assert abs(lam1["delta"]["c2"]) < 1e-9
    assert lam1["paper-printed"]["c1"] == pytest.approx(-0.5772156649015329)
    assert lam1["delta"]["c1"] != 0
    for ident in ("eq1.3", "ps2", "eq2.3", "intrep"):
        assert rep["sigma"][ident]["sigma"] in (1, -1)
    assert rep["paper_brackets"]["eq1.2"]["oracle-resolved"]["all_pass"]
    assert not rep["paper_brackets"]["eq1.2"]["paper-printed"]["all_pass"]


def record(passed):
    return VerificationRecord(IdentityId.EQ1_4.value, "0.5", 1.0, 1.0, 0.0, 0.0, 1e-6, passed,
                              PAPER, 1, 0.0, 0.0)


@given(st.lists(st.booleans()))
def test_exit_code_contract(flags):
    recs = [record(f) for f in flags]
    assert exit_status(recs) == (EXIT_PASS if all(flags) else EXIT_FAIL)


@pytest.mark.skipif(shutil.which("zetamellin") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["zetamellin", "eval", "zeta", "--s", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and "1.64493406684823" in proc.stdout
