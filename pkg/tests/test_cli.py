"""Command-line interface: reports, JSON output, seeds and exit codes."""

import io
import json
import pathlib
import subprocess
import sys

import pytest

from jetcurv.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, run

SPECS = pathlib.Path(__file__).resolve().parent.parent / "specs"
LEM = str(SPECS / "lemniscate.spec")


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def test_curvature_report_on_lemniscate():
    code, out = call("curvature", LEM, "--slice", "t")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert "Phi[t][t] = 1" in lines and "R_Gamma = 0" in lines and "R_H = 0" in lines
    assert "Phi[th][th] = 0" in lines and lines[-1] == "OK"


def test_second_slice_values():
    code, out = call("curvature", LEM, "--slice", "th")
    assert code == EXIT_OK and "Phi[th][th] = 4" in out.splitlines()


def test_split_prints_coefficients():
    code, out = call("split", LEM, "--slice", "t")
    assert code == EXIT_OK
    assert "H[r][r][th] = r_th/r" in out and "[PASS] t: duality AB (symbolic)" in out


def test_identities_all_pass():
    code, out = call("identities", LEM, "--slice", "t")
    assert code == EXIT_OK
    for row in ("Lemma 1", "Theorem 2", "Theorem 3", "appendix [[v,v]]", "display RH+"):
        assert f"[PASS] t: {row}" in out


def test_eigen_verify_points():
    code, out = call("eigen-verify", LEM, "--points", "5", "--slice", "t")
    assert code == EXIT_OK
    assert out.count("point ") == 5 + 5 * 4  # point header + four checks per point


def test_eigen_verify_tolerance_can_fail():
    code, out = call("eigen-verify", LEM, "--points", "2", "--slice", "t", "--tol", "1e-30")
    assert code == EXIT_FAIL and "[FAIL]" in out


def test_compatibility_failure_exits_one():
    code, out = call("compatibility", str(SPECS / "warped.spec"))
    assert code == EXIT_FAIL
    assert "dF[a][x2][x2]/da_x1 != 0" in out


def test_harmonic_command():
    code, out = call("harmonic", str(SPECS / "harmonic.spec"))
    assert code == EXIT_OK and out.count("[PASS]") == 4


def test_separability_command():
    code, out = call("separability", LEM)
    assert code == EXIT_OK and "[PASS] separability hypothesis" in out


def test_json_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert call("curvature", LEM, "--quiet", "--json", str(a))[0] == EXIT_OK
    assert call("curvature", LEM, "--quiet", "--json", str(b))[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert set(doc) == {"spec_hash", "seed", "command", "results"}
    assert doc["seed"] == "0x5EED" and doc["command"] == "curvature"
    row = next(r for r in doc["results"] if r["name"] == "Phi[t][t]")
    assert row == {"name": "Phi[t][t]", "status": "info", "value": "1"}


def test_quiet_prints_nothing():
    assert call("split", LEM, "--quiet") == (EXIT_OK, "")


def test_seed_precedence(tmp_path, monkeypatch):
    out = tmp_path / "o.json"
    monkeypatch.setenv("JETCURV_SEED", "ABC")
    call("split", LEM, "--quiet", "--json", str(out))
    assert json.loads(out.read_text())["seed"] == "0xABC"
    call("split", LEM, "--quiet", "--json", str(out), "--seed", "0x12")
    assert json.loads(out.read_text())["seed"] == "0x12"
    monkeypatch.delenv("JETCURV_SEED")
    call("split", LEM, "--quiet", "--json", str(out))
    assert json.loads(out.read_text())["seed"] == "0x5EED"


@pytest.mark.parametrize("argv", [
    ["split", "/nonexistent/file.spec"],
    ["split", LEM, "--slice", "nope"],
    ["split", LEM, "--points", "0"],
    ["split", LEM, "--tol", "-1"],
])
def test_input_errors_exit_two(argv, capsys):
    assert call(*argv)[0] == EXIT_INPUT
    assert "jetcurv: error:" in capsys.readouterr().err


def test_bad_spec_file_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.spec"
    bad.write_text("[system]\nn = 1\nm = 1\nx = t\ny = u\n[F]\nF[1][1][1] = u +\n")
    assert call("split", str(bad))[0] == EXIT_INPUT
    assert "line 7" in capsys.readouterr().err


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        run(["nonsense", LEM])
    assert info.value.code == 2


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "jetcurv.cli", "curvature", LEM, "--slice", "t"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and "Phi[t][t] = 1" in proc.stdout
