import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from skindepth import cli
from skindepth.force import ForceResult


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_grid():
    np.testing.assert_allclose(cli.parse_grid("1e-3:1e-1:3:log", "g"), [1e-3, 1e-2, 1e-1])
    np.testing.assert_allclose(cli.parse_grid("0:1:5:lin", "g", positive=False), np.linspace(0, 1, 5))
    np.testing.assert_array_equal(cli.parse_grid("2.5", "g"), [2.5])
    np.testing.assert_array_equal(cli.parse_grid("1,2,3", "g"), [1, 2, 3])


@pytest.mark.parametrize("text", ["1:2:1:log", "2:1:3:lin", "0:1:3:log", "1:2:3:cubic", "1:2:3",
                                  "abc", "1,-2", "nan"])
def test_parse_grid_errors_name_the_field(text):
    with pytest.raises(cli.UsageError, match="--omega-grid"):
        cli.parse_grid(text, "--omega-grid")


def test_eps_imaginary_grid(capsys):
    code, out, _ = run(capsys, "eps", "--axis", "imag", "--omega-grid", "1e-3:1e-1:3:log",
                       "--q-grid", "1e-1:10:3:log")
    assert code == 0
    rows = table(out)
    assert len(rows) == 9
    assert all(float(r["eps_l_re"]) >= 1 and float(r["eps_t_re"]) >= 1 for r in rows)
    assert all(r["model"] == "boltzmann" for r in rows)


def test_eps_local_plasma_example(tmp_path, capsys):
    cfg = tmp_path / "clean.cfg"
    cfg.write_text("name = clean\nomega_p_rad_s = 1e16\ngamma = 0\nv_f_cm_s = 1e8\n")
    code, out, _ = run(capsys, "eps", "--material", str(cfg), "--model", "local",
                       "--omega-grid", "1", "--q-grid", "0.5")
    assert code == 0
    assert float(table(out)[0]["eps_l_re"]) == 2.0


def test_exit_codes(capsys):
    code, _, err = run(capsys, "eps", "--model", "lindhard", "--kf", "10", "--omega-grid", "1e-2",
                       "--q-grid", "1")
    assert code == 2 and "unsupported" in err
    code, _, err = run(capsys, "impedance", "--omega-grid", "1:0.1:3:log", "--q-grid", "1")
    assert code == 1 and "--omega-grid" in err
    code, _, err = run(capsys, "force", "--a-grid", "100", "--material", "silver")
    assert code == 1 and "gold" in err
    code, _, err = run(capsys, "force", "--a-grid", "100", "--geometry", "sp")
    assert code == 1 and "--radius-nm" in err
    code, _, err = run(capsys, "force", "--a-grid", "100", "--tol", "0.5")
    assert code == 1 and "--tol" in err
    with pytest.raises(SystemExit) as exc:
        cli.main(["force", "--bogus"])
    assert exc.value.code == 1
    capsys.readouterr()


def test_force_perfect_conductor_row(capsys):
    code, out, _ = run(capsys, "force", "--a-grid", "200", "--override", "perfect-conductor")
    assert code == 0
    row = table(out)[0]
    assert float(row["eta"]) == pytest.approx(1.0, abs=1e-3)
    assert row["model"] == "perfect-conductor" and row["converged"] == "true"


def test_json_mirrors_csv(tmp_path, capsys):
    args = ["impedance", "--omega-grid", "1e-3:1e-2:2:log", "--q-grid", "0.1"]
    run(capsys, *args, "--out", str(tmp_path / "z.csv"))
    run(capsys, *args, "--format", "json", "--out", str(tmp_path / "z.json"))
    rows = table((tmp_path / "z.csv").read_text())
    payload = json.loads((tmp_path / "z.json").read_text())
    assert payload["columns"] == list(rows[0].keys())
    for r, j in zip(rows, payload["rows"]):
        assert float(r["z_s_re"]) == j["z_s_re"]
        assert j["converged"] is True


def test_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "impedance", "--model", "local", "--omega-grid", "0.3", "--q-grid", "0.7")
    mant = table(out)[0]["z_s_re"].split("e")[0].replace(".", "").lstrip("0")
    assert len(mant) <= 12


def test_determinism_across_workers(tmp_path, capsys, monkeypatch):
    # 81 points span two fixed chunks
    args = ["impedance", "--omega-grid", "1e-4:1:9:log", "--q-grid", "1e-2:10:9:log"]
    run(capsys, *args, "--workers", "1", "--out", str(tmp_path / "w1.csv"))
    run(capsys, *args, "--workers", "2", "--out", str(tmp_path / "w2.csv"))
    monkeypatch.setenv("SKINDEPTH_WORKERS", "3")
    run(capsys, *args, "--out", str(tmp_path / "w3.csv"))
    a = (tmp_path / "w1.csv").read_bytes()
    assert a == (tmp_path / "w2.csv").read_bytes() == (tmp_path / "w3.csv").read_bytes()
    assert len(table(a.decode())) == 81


def test_bad_worker_env(capsys, monkeypatch):
    monkeypatch.setenv("SKINDEPTH_WORKERS", "many")
    code, _, err = run(capsys, "force", "--a-grid", "200")
    assert code == 1 and "SKINDEPTH_WORKERS" in err


def test_unconverged_rows_are_blank_and_flagged(capsys, monkeypatch):
    def fake(a_nm, m, geometry, model, **kw):
        return ForceResult(geometry, a_nm, float("nan"), -1.0, float("inf"), 1.0, model, False, None, None)

    monkeypatch.setattr(cli.force, "lifshitz_force", fake)
    code, out, _ = run(capsys, "force", "--a-grid", "100,200", "--workers", "1")
    assert code == 3
    rows = table(out)
    assert len(rows) == 2
    for r in rows:
        assert r["converged"] == "false"
        assert r["value"] == r["value_s"] == r["eta"] == ""
        assert r["a_nm"] in ("100", "200")
    assert "nan" not in out.lower() and "inf" not in out.lower()


def test_absorptance_table(capsys):
    code, out, _ = run(capsys, "absorptance", "--material", "potassium", "--theta", "75",
                       "--omega-grid", "1e-2:1:4:log")
    assert code == 0
    rows = table(out)
    assert len(rows) == 4
    assert {"A_s_local", "A_p_nonlocal", "theta_deg"} <= set(rows[0])
    code, _, err = run(capsys, "absorptance", "--model", "local", "--omega-grid", "0.1")
    assert code == 1


def test_presets(capsys):
    code, out, _ = run(capsys, "presets")
    assert code == 0
    names = [r["name"] for r in table(out)]
    assert names == ["gold", "gold-force-fit", "potassium"]
    assert float(table(out)[0]["delta_nm"]) == pytest.approx(21.88, abs=0.01)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "skindepth", "presets", "--format", "json"],
                         capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["columns"][0] == "name"


def test_correction_command(capsys):
    code, out, _ = run(capsys, "correction", "--a-grid", "100,300", "--workers", "2")
    assert code == 0
    rows = table(out)
    for r in rows:
        for k in ("dF_rel_total", "dF_rel_p", "dF_rel_s"):
            assert float(r[k]) < 0
        assert r["geometry"] == "plate_plate"
