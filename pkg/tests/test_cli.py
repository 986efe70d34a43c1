import copy
import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracutm import cli, utm
from fracutm.errors import ValidationError

BASE = {
    "alpha": 2.0, "A": 1.0, "T": 0.5,
    "q0": {"family": "gaussian_x", "lam": 1.0},
    "bc": {"kind": "frac_dirichlet", "h": {"family": "zero"}},
    "grid": {"x": [0.25, 2.0, 4], "t": [0.1, 0.5, 3]},
    "quadrature": {"nodes_per_ray": 64},
    "output": {"field_path": "field.csv", "report_path": "report.json"},
}


def write_cfg(tmp_path, **over):
    cfg = copy.deepcopy(BASE)
    cfg.update(over)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return str(p)


def read_field(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return rows


def run(*args, env=None):
    e = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "fracutm", *args], capture_output=True,
                          text=True, env=e)


# -- config --------------------------------------------------------------------

def test_parse_valid_config(tmp_path):
    cfg = cli.parse_config(copy.deepcopy(BASE), str(tmp_path))
    assert cfg.spec.alpha == 2.0 and cfg.xs.size == 4 and cfg.ts.size == 3
    assert cfg.field_path == os.path.join(str(tmp_path), "field.csv")
    assert cfg.point_tol == cli.POINT_TOL


@pytest.mark.parametrize("mutate", [
    lambda c: c.pop("alpha"),
    lambda c: c.update(alpha="two"),
    lambda c: c.update(alpha=1.2),
    lambda c: c.update(A=-1.0),
    lambda c: c.update(T=0),
    lambda c: c["q0"].update(family="sinc"),
    lambda c: c["q0"].update(lam=-1.0),
    lambda c: c["bc"].update(kind="robin"),
    lambda c: c["bc"]["h"].update(family="nope"),
    lambda c: c["grid"].update(x=[0, 1]),
    lambda c: c["grid"].update(t=[0.5, 0.1, 3]),
    lambda c: c["grid"].update(t=[0.1, 0.9, 3]),
    lambda c: c["quadrature"].update(nodes_per_ray=100),
    lambda c: c["quadrature"].update(eps_rel=0.5),
], ids=["missing", "type", "range", "A", "T", "family", "lam", "kind", "h", "grid", "order",
        "beyond_T", "nodes", "eps_rel"])
def test_parse_invalid_config(mutate):
    raw = copy.deepcopy(BASE)
    mutate(raw)
    with pytest.raises(ValidationError):
        cli.parse_config(raw)


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(0.5, 3.0), A=st.floats(-1, 3), T=st.floats(-0.5, 2), lam=st.floats(-1, 3),
       n=st.integers(-1, 5))
def test_parse_random_config(alpha, A, T, lam, n):
    raw = copy.deepcopy(BASE)
    raw.update(alpha=alpha, A=A, T=T)
    raw["q0"]["lam"] = lam
    raw["grid"]["x"] = [0.25, 2.0, n]
    raw["grid"]["t"] = [0.1 * max(T, 0), max(T, 0), 2]
    ok = (1.5 < alpha < 7 / 3 and A > 0 and T > 0 and lam > 0 and n >= 1)
    if ok:
        cfg = cli.parse_config(raw)
        assert cfg.spec.alpha == alpha
    else:
        with pytest.raises(ValidationError):
            cli.parse_config(raw)


# -- regions -------------------------------------------------------------------

def test_regions_json():
    g = cli.regions_json(2.0)
    assert g["sectors"] == [pytest.approx([0.7853981, 2.3561944], abs=1e-7)]
    assert g["nu"] == pytest.approx([-1.0, 0.0], abs=1e-15)
    assert cli.regions_json(1.4)["sectors"] == []
    assert cli.regions_json(1.4)["nu"] is None
    assert cli.regions_json(2.2)["gamma_rays"] == pytest.approx([2.5704, 0.5712], abs=1e-4)


def test_cmd_regions_files(tmp_path, capsys):
    out, cp = tmp_path / "g.json", tmp_path / "r.csv"
    assert cli.cmd_regions(2.2, str(out), str(cp)) == 0
    assert json.loads(out.read_text())["alpha"] == 2.2
    rows = list(csv.DictReader(cp.open()))
    assert rows[0].keys() == {"ray_id", "re", "im"} and len(rows) == 102
    assert cli.cmd_regions(2.6) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValidationError" and "reason" in err


# -- solve ---------------------------------------------------------------------

def test_solve_zero_config(tmp_path):
    p = write_cfg(tmp_path, q0={"family": "zero"})
    assert cli.main(["solve", p]) == 0
    rows = read_field(tmp_path / "field.csv")
    assert len(rows) == 12 and list(rows[0]) == ["x", "t", "re_q", "im_q", "err_est"]
    assert all(float(r["re_q"]) == 0 and float(r["im_q"]) == 0 for r in rows)
    # row-major in t then x
    assert [float(r["t"]) for r in rows[:4]] == [0.1] * 4
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["gr_residual_max"] == 0 and rep["pde_residual_rel"] == 0


def test_solve_alpha_out_of_range(tmp_path):
    p = write_cfg(tmp_path, alpha=1.2)
    r = run("solve", p)
    assert r.returncode == 2
    err = json.loads(r.stderr.strip().splitlines()[-1])
    assert err["reason"] == "alpha outside solve range (3/2, 7/3)"


def test_solve_tolerance_flag(tmp_path, capsys):
    p = write_cfg(tmp_path, quadrature={"nodes_per_ray": 16, "tol": 1e-16},
                  grid={"x": [1.0, 1.0, 1], "t": [0.25, 0.25, 1]})
    assert cli.cmd_solve(p) == 3
    assert json.loads(capsys.readouterr().err)["error"] == "ToleranceNotMetError"
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["quadrature"]["points_over_tol"] == 1


def test_solve_heat_and_determinism(tmp_path):
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        p = write_cfg(d, quadrature={"nodes_per_ray": 256})
        r = run("solve", p, env={"FRACUTM_NO_TIMING": "1"})
        assert r.returncode == 0, r.stderr
        outs.append(((d / "field.csv").read_bytes(), (d / "report.json").read_bytes()))
    assert outs[0] == outs[1]
    rows = read_field(tmp_path / "a" / "field.csv")
    err = max(abs(float(r["re_q"]) + 1j * float(r["im_q"])
                  - utm.heat_oracle(1, 1, float(r["x"]), float(r["t"]))) for r in rows)
    assert err <= 1e-3
    rep = json.loads(outs[0][1])
    assert rep["runtime_s"] is None and rep["gr_residual_max"] <= 1e-3


# -- check and converge --------------------------------------------------------

def test_check_geometry(capsys):
    assert cli.main(["check", "geometry"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_converge_levels_guard(tmp_path):
    assert cli.cmd_converge(write_cfg(tmp_path), 2) == 2


def test_converge_zero_data(tmp_path, capsys):
    assert cli.cmd_converge(write_cfg(tmp_path, q0={"family": "zero"}), 3) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["differences"] == [0.0, 0.0] and res["observed_order"] == "inf"


def test_converge_heat_small(tmp_path, capsys):
    p = write_cfg(tmp_path, quadrature={"nodes_per_ray": 32})
    assert cli.cmd_converge(p, 3) == 0
    res = json.loads(capsys.readouterr().out)
    o = res["observed_order"]
    assert o == "inf" or (isinstance(o, float) and o >= 1 and not math.isnan(o))
    assert np.all(np.asarray(res["differences"]) < 1e-6)
