import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from blueep.cli import CONTOUR_COLUMNS, PHASE_COLUMNS, SWEEP_COLUMNS, main

GOLDEN = Path(__file__).parent / "golden"


def run(*argv) -> int:
    return main([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# -- goldens -------------------------------------------------------------------


def test_ep3_golden(tmp_path):
    out = tmp_path / "ep3.json"
    assert run("ep3", "--eta", "-1.1", "-o", out) == 0
    assert out.read_bytes() == (GOLDEN / "ep3_eta_-1.1.json").read_bytes()


def test_sweep_golden(tmp_path):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--delta-a", "10", "--from", "2.9", "--to", "3.7", "--n", "9", "-o", out]
    assert run(*argv) == 0
    assert out.read_bytes() == (GOLDEN / "sweep_delta10.csv").read_bytes()


def test_phase_golden(tmp_path):
    out = tmp_path / "p.csv"
    argv = ["phase", "--nx", "4", "--ny", "5", "--x-from", "0", "--x-to", "3",
            "--y-from", "0", "--y-to", "8", "-o", out]
    assert run(*argv) == 0
    assert out.read_bytes() == (GOLDEN / "phase_small.csv").read_bytes()
    contours = tmp_path / "p_contours.csv"
    assert contours.read_bytes() == (GOLDEN / "phase_small_contours.csv").read_bytes()


def test_stability_golden(tmp_path):
    out = tmp_path / "st.json"
    argv = ["stability", "--mode", "explicit", "--eta", "0.5", "--delta-a", "50", "--delta-c", "50",
            "--ga", "0", "--gc", "0", "--gamma-b", "0.3", "-o", out]
    assert run(*argv) == 0
    assert out.read_bytes() == (GOLDEN / "stability_decoupled.json").read_bytes()
    data = json.loads(out.read_text())
    # (l + 0.5)^2 (l + 1)^2 ((l + 0.3)^2 + 2500)
    assert data["c0"] == 0.25 * 2500.09
    assert data["c5"] == 3.6


# -- schemas -------------------------------------------------------------------


def test_sweep_schema_and_ep3_rows(tmp_path):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--mode", "balanced", "--delta-a", 3 * math.sqrt(3), "--ga-from", "-4",
            "--ga-to", "4", "--n", "1024", "-o", out]
    assert run(*argv) == 0
    rows = read_csv(out)
    assert rows[0] == SWEEP_COLUMNS
    ep3 = [r for r in rows[1:] if r[-1] == "EP3"]
    assert [float(r[0]) for r in ep3] == pytest.approx([-2.0, 2.0], abs=1e-9)


def test_phase_schema(tmp_path):
    out = tmp_path / "p.csv"
    cont = tmp_path / "c.csv"
    assert run("phase", "--nx", "16", "--ny", "16", "-o", out, "--contours", cont) == 0
    rows = read_csv(out)
    assert rows[0] == PHASE_COLUMNS
    assert len(rows) == 1 + 16 * 16
    crow = read_csv(cont)
    assert crow[0] == CONTOUR_COLUMNS
    assert {r[0] for r in crow[1:]} <= {"D", "A", "B", "EP3"}


def test_stability_schema(tmp_path):
    out = tmp_path / "st.json"
    argv = ["stability", "--mode", "balanced", "--delta-a", 3 * math.sqrt(3), "--ga", "2", "-o", out]
    assert run(*argv) == 0
    data = json.loads(out.read_text())
    assert list(data) == ["c0", "c1", "c2", "c3", "c4", "c5", "rh_stable", "eigen_stable", "max_real_part"]
    assert data["c5"] == 0.0 and data["rh_stable"] is False


def test_json_format_for_sweep(tmp_path):
    out = tmp_path / "s.json"
    argv = ["sweep", "--delta-a", "10", "--from", "0", "--to", "6", "--n", "64", "--format", "json", "-o", out]
    assert run(*argv) == 0
    data = json.loads(out.read_text())
    assert data["columns"] == SWEEP_COLUMNS
    axes = [c["axis"] for c in data["coalescences"]]
    assert axes == pytest.approx([2.98934, 3.60858], abs=1e-5)


def test_broken_command(tmp_path):
    out = tmp_path / "b.csv"
    coal = tmp_path / "c.json"
    argv = ["broken", "--offset", "0.1", "--delta-a", 3 * math.sqrt(3), "--from", "1.5", "--to", "2.5",
            "--n", "101", "-o", out, "--coalescences", coal]
    assert run(*argv) == 0
    (c,) = json.loads(coal.read_text())
    assert c["kind"] == "NearEP"
    assert c["axis"] == pytest.approx(2.0, abs=0.05)


def test_unbalanced_sweep_lam_factor(tmp_path):
    out = tmp_path / "c.json"
    argv = ["sweep", "--mode", "unbalanced", "--eta", "-1.1", "--lam-factor", "1.2", "--from", "0",
            "--to", "4", "--n", "256", "-o", tmp_path / "s.csv", "--coalescences", out]
    assert run(*argv) == 0
    (c,) = json.loads(out.read_text())
    assert c["axis"] == pytest.approx(2.43865, abs=1e-4)
    assert c["re_x"] == pytest.approx(9.05069, abs=1e-4)


def test_kappa_scaling(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("ep3", "--eta", "-1.1", "-o", a) == 0
    assert run("ep3", "--eta", "-1.1", "--kappa-c", "2", "-o", b) == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert db["g_a_ep3"] == pytest.approx(2 * da["g_a_ep3"])
    assert db["lambda_ep3"] == da["lambda_ep3"]


def test_steady_command(tmp_path):
    out = tmp_path / "ss.json"
    argv = ["steady", "--omega-a", "-49", "--omega-c", "-49", "--omega-b", "50", "--nu-a", "0",
            "--nu-c", "0", "--g-a", "1e-4", "--g-c", "1e-4", "--drive-a", "1e4", "--drive-c", "1e4+0j",
            "--kappa-a", "-1", "--kappa-c", "1", "--gamma-b", "0.1", "-o", out]
    assert run(*argv) == 0
    data = json.loads(out.read_text())
    assert data["residual"] < 1e-12
    assert data["reduced"]["eta"] == -1.0
    assert isinstance(data["rwa"]["ok"], bool)


# -- config --------------------------------------------------------------------


def test_config_round_trip_is_byte_identical(tmp_path):
    cfg = tmp_path / "cfg.json"
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sweep", "--delta-a", "10", "--from", "0", "--to", "6", "--n", "50",
            "--tol", "eps_D=1e-7", "--dump-config", cfg, "-o", a]
    assert run(*argv) == 0
    assert run("sweep", "--config", cfg, "-o", b) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(cfg.read_text())
    assert data["tolerances"] == {"eps_D": 1e-7}
    cfg2 = tmp_path / "cfg2.json"
    assert run("sweep", "--config", cfg, "-o", a, "--dump-config", cfg2) == 0
    assert cfg.read_bytes() == cfg2.read_bytes()


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eta": -1.1}))
    out = tmp_path / "e.json"
    assert run("ep3", "--config", cfg, "--eta", "-0.8", "-o", out) == 0
    assert json.loads(out.read_text())["eta"] == -0.8


def test_repeated_runs_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run("phase", "--nx", "32", "--ny", "32", "-o", out) == 0
    assert a.read_bytes() == b.read_bytes()


# -- exit codes ----------------------------------------------------------------


@pytest.mark.parametrize(
    "argv, code",
    [
        (["ep3", "--eta", "-0.4"], 2),
        (["ep3"], 2),
        (["sweep", "--n", "10"], 2),
        (["sweep", "--mode", "unbalanced", "--eta", "-1.1", "--lam", "0.5"], 3),
        (["sweep", "--mode", "unbalanced", "--eta", "-1.1", "--lam", "1.3", "--from", "0", "--to", "0.1"], 3),
        (["stability", "--mode", "ph", "--eta", "-1.1", "--lam", "1.3", "--ga", "0.01"], 3),
        (["sweep", "--delta-a", "nan"], 2),
        (["phase", "--mode", "unbalanced"], 2),
        (["stability", "--mode", "explicit", "--eta", "1"], 2),
    ],
)
def test_exit_codes(tmp_path, capsys, argv, code):
    assert main(argv + ["-o", str(tmp_path / "out")]) == code
    err = capsys.readouterr().err
    assert err.startswith("error:")


def test_ep3_range_message(capsys):
    assert main(["ep3", "--eta", "-0.4"]) == 2
    assert "(-2, -1/2)" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"delta_a": 3.0}))
    assert main(["sweep", "--config", str(cfg)]) == 2
    assert "delta_a" in capsys.readouterr().err


def test_unknown_tolerance_key(tmp_path):
    assert main(["sweep", "--delta-a", "1", "--tol", "eps_X=1"]) == 2


def test_numeric_failure_exit(tmp_path, monkeypatch):
    import blueep.cli as cli
    from blueep.errors import NumericFailureError

    def boom(cfg):
        raise NumericFailureError("did not converge", residual=1.0)

    monkeypatch.setitem(cli._HANDLERS, "ep3", boom)
    assert main(["ep3", "--eta", "-1"]) == 4


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--n", "many"])
    assert info.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "blueep", "ep3", "--eta", "-1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert data["g_a_ep3"] == 2.0
    assert data["delta_a_ep3_plus"] == pytest.approx(3 * math.sqrt(3))
