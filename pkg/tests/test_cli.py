"""End-to-end command line checks: configs in, CSV out, exit codes."""

import csv
import hashlib
import io
import json
import math

import pytest

from shellbound.cli import load_config, main
from shellbound.errors import ConfigError

SPHERE_NU = {
    "surfaces": [
        {
            "shape": "sphere",
            "params": {"radius": 1.0},
            "order": 12,
            "coupling": {"nu_star": 1.0},
        }
    ]
}

SPHERE_LAM = {
    "surfaces": [
        {
            "shape": "sphere",
            "params": {"radius": 1.0},
            "order": 12,
            "coupling": {"lambda": 2.313035285680343},
        }
    ]
}


def write_cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def read_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_sha256=")
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    return lines, list(csv.DictReader(io.StringIO("\n".join(body))))


def test_help_exits_zero():
    with pytest.raises(SystemExit) as ei:
        main(["-h"])
    assert ei.value.code == 0


def test_usage_errors_exit_one(tmp_path, capsys):
    assert main([]) == 1
    assert main(["solve"]) == 1
    assert main(["frobnicate", "--config", "x.json"]) == 1
    cfg = write_cfg(tmp_path, SPHERE_NU)
    assert main(["sweep", "--config", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert "error:" in err


@pytest.mark.parametrize(
    "mangle",
    [
        lambda d: {**d, "bogus_key": 1},
        lambda d: {**d, "surfaces": [{**d["surfaces"][0], "coupling": {"lambda": 1.0, "nu_star": 1.0}}]},
        lambda d: {**d, "surfaces": [{**d["surfaces"][0], "coupling": {}}]},
        lambda d: {**d, "surfaces": [{**d["surfaces"][0], "shape": "cube"}]},
        lambda d: {**d, "surfaces": [{**d["surfaces"][0], "order": 3}]},
        lambda d: {**d, "surfaces": [{**d["surfaces"][0], "order": 1}]},
        lambda d: {**d, "surfaces": [{**d["surfaces"][0], "params": {"radius": -1.0}}]},
        lambda d: {**d, "solver": {"nu_min": 2.0, "nu_max": 1.0}},
        lambda d: {**d, "output": {"format": "json"}},
        lambda d: {**d, "ambient": {"kind": "spherical"}},
        lambda d: {**d, "points": [{"position": [5.0, 0.0, 0.0], "mu": 0.5}]},
        lambda d: {"constants": d.get("constants", {})},
        lambda d: {
            **d,
            "surfaces": [
                {
                    "shape": "torus",
                    "params": {"R_major": 1.0, "r_minor": 2.0},
                    "order": 12,
                    "coupling": {"nu_star": 1.0},
                }
            ],
        },
    ],
)
def test_config_errors_exit_one(tmp_path, mangle):
    cfg = write_cfg(tmp_path, mangle(SPHERE_NU))
    out = tmp_path / "never.csv"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 1
    assert not out.exists()


def test_missing_and_malformed_config(tmp_path, capsys):
    assert main(["solve", "--config", str(tmp_path / "nope.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"surfaces": [}')
    assert main(["solve", "--config", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "line" in err and "column" in err


@pytest.mark.parametrize(
    "param,grid",
    [
        ("nu", "abc"),
        ("nu", ""),
        ("nu", "2.0,1.0"),
        ("nu", "-1.0"),
        ("nu", "0.0,1.0"),
        ("banana", "1.0"),
        ("separation", "3.0,4.0"),
        ("radius", "1.0,2.0"),
    ],
)
def test_sweep_argument_errors(tmp_path, param, grid):
    data = SPHERE_NU
    if param == "radius":
        data = {
            "surfaces": [
                {
                    "shape": "torus",
                    "params": {"R_major": 2.0, "r_minor": 0.5},
                    "order": 12,
                    "coupling": {"nu_star": 1.0},
                }
            ]
        }
    cfg = write_cfg(tmp_path, data)
    code = main(
        ["sweep", "--config", str(cfg), "--param", param, "--grid", grid,
         "--out", str(tmp_path / "never.csv")]
    )
    assert code == 1


def test_solve_csv_structure(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SPHERE_NU)
    out = tmp_path / "solve.csv"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert f"wrote {out}" in captured.out
    assert "wall_time_s=" in captured.err
    assert "wall_time_s=" not in captured.out

    raw = out.read_bytes()
    assert b"\r" not in raw
    lines, rows = read_rows(out)
    sha = hashlib.sha256(cfg.read_bytes()).hexdigest()
    assert lines[0] == f"# config_sha256={sha}"
    assert lines[1] == "run_id,command,E_gr,nu_star,weights,residual,converged,iterations"
    (row,) = rows
    assert len(row["run_id"]) == 12 and int(row["run_id"], 16) >= 0
    assert row["command"] == "solve"
    assert float(row["E_gr"]) == pytest.approx(-1.0, abs=1e-9)
    assert float(row["nu_star"]) == pytest.approx(1.0, abs=1e-9)
    assert row["weights"] == "1.0"
    assert row["converged"] == "true"
    assert float(row["residual"]) < 1e-10
    assert int(row["iterations"]) > 0


def test_output_path_from_config(tmp_path, capsys):
    out = tmp_path / "from_config.csv"
    data = {**SPHERE_NU, "output": {"path": str(out)}}
    cfg = write_cfg(tmp_path, data)
    assert main(["solve", "--config", str(cfg)]) == 0
    assert out.exists()
    assert f"wrote {out}" in capsys.readouterr().out


def test_bounds_rows(tmp_path):
    cfg = write_cfg(tmp_path, SPHERE_NU)
    out = tmp_path / "bounds.csv"
    assert main(["bounds", "--config", str(cfg), "--out", str(out)]) == 0
    _, rows = read_rows(out)
    by_kind = {(r["row_kind"], r["case"]): r for r in rows}
    model = by_kind[("model", "model_flat_Hpos")]
    # quarter of (pi/2 + 1): the positive-curvature closed form on the unit sphere
    assert float(model["value"]) == pytest.approx(0.25 * (math.pi / 2.0 + 1.0), rel=1e-12)
    assert model["validation"] == "ok"
    diam = by_kind[("diameter", "")]
    assert float(diam["value"]) == pytest.approx(0.5, rel=1e-12)
    assert diam["validation"] == "ok"
    exact = by_kind[("exact", "")]
    assert float(exact["value"]) == pytest.approx(0.9999000066028212, rel=1e-9)
    assert exact["validation"] == ""
    for r in rows:
        if r["validation"]:
            assert r["validation"] == "ok"


def test_bounds_gersgorin_row(tmp_path):
    data = {
        "surfaces": [
            {
                "shape": "sphere",
                "params": {"radius": 1.0, "center": [0.0, 0.0, 0.0]},
                "order": 12,
                "coupling": {"nu_star": 1.0},
            },
            {
                "shape": "sphere",
                "params": {"radius": 1.0, "center": [4.0, 0.0, 0.0]},
                "order": 12,
                "coupling": {"nu_star": 1.0},
            },
        ]
    }
    cfg = write_cfg(tmp_path, data)
    out = tmp_path / "bounds2.csv"
    assert main(["bounds", "--config", str(cfg), "--out", str(out)]) == 0
    _, rows = read_rows(out)
    gers = [r for r in rows if r["row_kind"] == "gersgorin"]
    assert len(gers) == 1
    row = gers[0]
    assert row["surface_index"] == "all"
    assert float(row["value"]) <= float(row["exact"]) + 1e-12
    assert row["validation"] == "ok"


def test_sweep_nu_diagnostic(tmp_path):
    cfg = write_cfg(tmp_path, SPHERE_NU)
    out = tmp_path / "sweep.csv"
    code = main(
        ["sweep", "--config", str(cfg), "--param", "nu",
         "--grid", "0.5,1.0,2.0", "--out", str(out)]
    )
    assert code == 0
    lines, rows = read_rows(out)
    assert lines[-1] == "# diagnostic: omega_min_nondecreasing=pass"
    values = {r["param_value"]: float(r["metric_value"]) for r in rows}
    # at nu = nu_star the single-channel matrix entry vanishes identically
    assert values["1.0"] == 0.0
    assert values["0.5"] < 0.0 < values["2.0"]


def test_sweep_lambda_subcritical_rows(tmp_path):
    cfg = write_cfg(tmp_path, SPHERE_LAM)
    out = tmp_path / "sweepl.csv"
    code = main(
        ["sweep", "--config", str(cfg), "--param", "lambda",
         "--grid", "0.9,0.999,1.5,2.5", "--out", str(out)]
    )
    assert code == 0
    lines, rows = read_rows(out)
    assert lines[-1] == "# diagnostic: E_gr_nonincreasing=pass"
    for r in rows:
        if float(r["param_value"]) < 1.0:
            assert r["status"] == "no-bound-state"
            assert r["metric_value"] == ""
        else:
            assert r["status"] == ""
            assert r["metric_value"] != ""
    bound = [float(r["metric_value"]) for r in rows
             if r["metric"] == "E_gr" and r["metric_value"]]
    assert bound == sorted(bound, reverse=True)


def test_variational_csv(tmp_path):
    cfg = write_cfg(tmp_path, SPHERE_LAM)
    out = tmp_path / "var.csv"
    assert main(["variational", "--config", str(cfg), "--out", str(out)]) == 0
    lines, rows = read_rows(out)
    assert lines[1] == "run_id,command,alpha_star,E_gr,weights,schur_gap,phi_tilde_residual"
    (row,) = rows
    assert float(row["alpha_star"]) == pytest.approx(1.0, abs=1e-9)
    assert float(row["E_gr"]) == -float(row["alpha_star"])
    assert float(row["schur_gap"]) > 0.0
    assert float(row["phi_tilde_residual"]) < 1e-10


def test_hybrid_csv(tmp_path):
    data = {
        "surfaces": [
            {
                "shape": "sphere",
                "params": {"radius": 1.0},
                "order": 12,
                "coupling": {"lambda": 1.5},
            }
        ],
        "points": [{"position": [6.0, 0.0, 0.0], "mu": 0.5}],
    }
    cfg = write_cfg(tmp_path, data)
    out = tmp_path / "hyb.csv"
    assert main(["hybrid", "--config", str(cfg), "--out", str(out)]) == 0
    lines, rows = read_rows(out)
    assert lines[1] == (
        "run_id,command,row_kind,point_index,separation,mu,E_gr,nu_star,"
        "weights,residual,delta_mu2,exact_shift,ratio"
    )
    kinds = [r["row_kind"] for r in rows]
    assert kinds == ["system", "perturbation"]
    sys_row, pert = rows
    assert float(sys_row["E_gr"]) < -0.25
    assert ";" in sys_row["weights"]
    assert float(pert["separation"]) == 6.0
    assert float(pert["delta_mu2"]) > 0.0
    assert float(pert["ratio"]) == pytest.approx(1.0, abs=0.2)


def test_domain_errors_exit_two(tmp_path, capsys):
    sub = {
        "surfaces": [
            {
                "shape": "sphere",
                "params": {"radius": 1.0},
                "order": 12,
                "coupling": {"lambda": 0.999},
            }
        ]
    }
    cfg = write_cfg(tmp_path, sub)
    out = tmp_path / "never.csv"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()
    assert "error: no bound state in bracket" in capsys.readouterr().err

    res = {
        "surfaces": [
            {
                "shape": "sphere",
                "params": {"radius": 1.0},
                "order": 16,
                "coupling": {"lambda": 2.313035285680343},
            }
        ],
        "points": [{"position": [10.0, 0.0, 0.0], "mu": 1.0}],
    }
    cfg2 = write_cfg(tmp_path, res, name="res.json")
    out2 = tmp_path / "never2.csv"
    assert main(["hybrid", "--config", str(cfg2), "--out", str(out2)]) == 2
    assert not out2.exists()
    assert "error: degenerate-perturbation" in capsys.readouterr().err


def test_bitwise_determinism(tmp_path):
    cfg = write_cfg(tmp_path, SPHERE_NU)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["solve", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["solve", "--config", str(cfg), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c, d = tmp_path / "c.csv", tmp_path / "d.csv"
    args = ["sweep", "--config", str(cfg), "--param", "nu", "--grid", "0.5,1.5"]
    assert main(args + ["--out", str(c)]) == 0
    assert main(args + ["--out", str(d)]) == 0
    assert c.read_bytes() == d.read_bytes()


def test_load_config_returns_built_objects(tmp_path):
    cfg = write_cfg(tmp_path, SPHERE_NU)
    built = load_config(str(cfg))
    assert len(built.surfaces) == 1
    assert built.surfaces[0].area == pytest.approx(4.0 * math.pi, rel=1e-9)
    assert built.constants.hbar == 1.0 and built.constants.mass == 0.5
    assert built.space.is_flat
    assert len(built.config_sha256) == 64
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))


def test_shipped_configs_parse(config_dir):
    names = sorted(p.name for p in config_dir.glob("*.json"))
    assert len(names) == 11
    for name in names:
        built = load_config(str(config_dir / name))
        assert built.surfaces or built.points
