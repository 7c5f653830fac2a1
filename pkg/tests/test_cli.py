import json
import math
from pathlib import Path

import numpy as np
import pytest

from eqtcatch.cli import OUTPUT_ENV, main
from eqtcatch.io import read_kernel, sha256_file

SMALL = ["--set", "grid.n_points=61"]
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _manifest(directory):
    return json.loads((directory / "manifest.json").read_text())


def _check_manifest(directory):
    man = _manifest(directory)
    names = [e["path"] for e in man["files"]]
    assert len(names) == len(set(names))
    on_disk = {p.name for p in directory.iterdir()} - {"manifest.json"}
    assert set(names) == on_disk
    for e in man["files"]:
        assert e["sha256"] == sha256_file(directory / e["path"])
    return man


# analytic --------------------------------------------------------------------

def test_analytic_markers(tmp_path, capsys):
    assert main(["analytic", "--out", str(tmp_path)]) == 0
    markers = json.loads((tmp_path / "analytic.json").read_text())
    assert markers["t_m_ns"] == pytest.approx(1e3 / (2 * math.pi), rel=1e-12)
    assert markers["eta_max_fixed"] == pytest.approx(4 / math.e**2, abs=1e-4)
    assert markers["eta_tunable_limit"] == pytest.approx(2 / math.e, abs=1e-12)
    assert markers["ode_max_relative_error"] <= 1e-6
    table = np.genfromtxt(tmp_path / "analytic.csv", delimiter=",", names=True)
    assert table["eta_fixed"].max() == pytest.approx(4 / math.e**2, abs=1e-4)
    assert "eta_max" in capsys.readouterr().out
    _check_manifest(tmp_path)


@pytest.mark.parametrize("argv", [
    ["analytic", "--kappa1-two-pi-MHz", "0"],
    ["analytic", "--gamma-two-pi-MHz", "-1"],
    ["analytic", "--n-points", "1"],
    ["nonsense"],
    [],
    ["schmidt", "--kernel", "x.csv", "--modes", "0"],
])
def test_usage_errors(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if len(argv) > 1 and argv[0] == "analytic" else [])) == 2


def test_env_var_sets_output(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["analytic", "--n-points", "101"]) == 0
    assert (tmp_path / "env" / "analytic.csv").exists()
    assert main(["analytic", "--n-points", "101", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "analytic.csv").exists()


# pipeline ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def row_b_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("rowb")
    assert main(["pipeline", "--config", str(CONFIGS / "gaussian_pump.ini"), "--out", str(out)]) == 0
    return out


def test_pipeline_outputs(row_b_run):
    man = _check_manifest(row_b_run)
    assert man["status"] == "complete"
    panels = {e["panel"] for e in man["files"]}
    assert {"config", "pump", "kernel", "modes", "capture"} <= panels
    r = man["results"]
    assert r["lambda_0"] > r["lambda_1"]
    assert r["eta_final"] >= 0.9
    assert r["bookkeeping_residual"] <= 1e-6
    modes = json.loads((row_b_run / "modes.json").read_text())
    assert modes["exported_modes"] == 3 and len(modes["phases"]) == 3
    assert sum(modes["lambdas"]) == pytest.approx(1.0, abs=1e-10)
    K = read_kernel(row_b_run / "kernel.csv")
    assert K.grid.n_points == 241


def test_pipeline_rerun_from_manifest_is_identical(row_b_run, tmp_path):
    again = tmp_path / "again"
    assert main(["pipeline", "--from-manifest", str(row_b_run / "manifest.json"), "--out", str(again)]) == 0
    first, second = _manifest(row_b_run), _manifest(again)
    assert first["config_hash"] == second["config_hash"]
    sums = lambda m: {e["path"]: e["sha256"] for e in m["files"]}  # noqa: E731
    assert sums(first) == sums(second)


def test_catch_exported_mode_matches_pipeline(row_b_run, tmp_path):
    assert main(["catch", "--photon", str(row_b_run / "modes_microwave.csv"), "--mode", "0",
                 "--kappa1-init-two-pi-MHz", "6", "--out", str(tmp_path)]) == 0
    mine = json.loads((tmp_path / "capture.json").read_text())["eta_final"]
    theirs = _manifest(row_b_run)["results"]["eta_final"]
    assert mine == pytest.approx(theirs, abs=1e-9)


def test_schmidt_command_on_exported_kernel(row_b_run, tmp_path):
    assert main(["schmidt", "--kernel", str(row_b_run / "kernel.csv"), "--out", str(tmp_path)]) == 0
    a = json.loads((tmp_path / "modes.json").read_text())
    b = json.loads((row_b_run / "modes.json").read_text())
    np.testing.assert_allclose(a["lambdas"][:3], b["lambdas"][:3], atol=1e-12)
    assert main(["schmidt", "--kernel", str(row_b_run / "kernel.csv"), "--magnitude-only",
                 "--out", str(tmp_path / "mag")]) == 0


def test_unstable_pump_fails_with_marker(tmp_path, capsys):
    out = tmp_path / "bad"
    code = main(["pipeline", *SMALL, "--set", "pump.G2=100", "--out", str(out)])
    assert code == 3
    assert (out / "FAILED").exists()
    man = _check_manifest(out)
    assert man["status"] == "failed" and man["error"].startswith("InstabilityError")
    assert (out / "config.ini").exists()
    assert "numeric failure" in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[pump]\nshape = gaussian\nG2 = 1\nsigma_ns = 40\nnu_ns = 120\nwobble = 3\n")
    assert main(["transduce", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["transduce", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == 2
    assert main(["transduce", "--set", "grid.n_points=x", "--out", str(tmp_path)]) == 2


def test_transduce_fock_engine(tmp_path):
    assert main(["transduce", "--engine", "fock", "--n-points", "17", "--out", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "kernel.json").read_text())
    assert meta["engine"] == "fock"
    _check_manifest(tmp_path)


def test_transduce_is_deterministic(tmp_path):
    for name in ("x", "y"):
        assert main(["transduce", *SMALL, "--out", str(tmp_path / name)]) == 0
    assert sha256_file(tmp_path / "x" / "kernel.csv") == sha256_file(tmp_path / "y" / "kernel.csv")


# catch on hand-made files ----------------------------------------------------

def test_catch_rising_exponential(tmp_path):
    gamma = 2 * math.pi * 1e6
    t = np.linspace(-12 / gamma, 0.0, 601)
    lines = ["t_ns,re,im"] + [f"{x * 1e9:.17g},{math.exp(0.5 * gamma * x):.17g},0" for x in t]
    (tmp_path / "rise.csv").write_text("\n".join(lines) + "\n")
    assert main(["catch", "--photon", str(tmp_path / "rise.csv"), "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "capture.json").read_text())["eta_final"] >= 0.999
    _check_manifest(tmp_path / "o")


def test_catch_no_balance_exit_3(tmp_path):
    gamma = 2 * math.pi * 1e6
    t = np.linspace(-12 / gamma, 0.0, 301)
    lines = ["t_ns,re"] + [f"{x * 1e9:.17g},{math.exp(0.5 * gamma * x):.17g}" for x in t]
    (tmp_path / "rise.csv").write_text("\n".join(lines) + "\n")
    out = tmp_path / "o"
    assert main(["catch", "--photon", str(tmp_path / "rise.csv"), "--kappa1-init-two-pi-MHz", "1",
                 "--out", str(out)]) == 3
    assert (out / "FAILED").exists()


@pytest.mark.parametrize("text, fragment", [("", "empty.csv:1:"), ("t_ns,re\n0,1\n1,1\n2,oops\n3,1\n", "empty.csv:4:")])
def test_catch_parse_errors(tmp_path, capsys, text, fragment):
    (tmp_path / "empty.csv").write_text(text)
    assert main(["catch", "--photon", str(tmp_path / "empty.csv"), "--out", str(tmp_path / "o")]) == 2
    assert fragment in capsys.readouterr().err


def test_catch_bad_bounds(tmp_path):
    (tmp_path / "p.csv").write_text("t_ns,re\n0,0\n1,1\n2,1\n3,0\n")
    assert main(["catch", "--photon", str(tmp_path / "p.csv"), "--kappa1-init-two-pi-MHz", "30",
                 "--out", str(tmp_path / "o")]) == 2
