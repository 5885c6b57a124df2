import json
import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from polyvem.cli import main
from polyvem.errors import ConfigurationError
from polyvem.io import (
    RunConfig,
    load_config,
    manifest,
    mesh_from_dict,
    mesh_to_dict,
    read_mesh_json,
    read_vtk_counts,
    save_config,
    write_mesh_json,
    write_vtk,
)
from polyvem.mesh import generate_polygonal_mesh, generate_quad_mesh, rectangle_domain
from polyvem.postprocess import read_profile_csv

HERE = os.path.dirname(os.path.abspath(__file__))
GOLDEN = os.path.join(HERE, "golden")
CONFIGS = os.path.join(os.path.dirname(HERE), "configs")


def test_mesh_json_round_trip(tmp_path):
    m = generate_polygonal_mesh(rectangle_domain((0, 2), (0, 1)), 25, seed=3).with_region_materials({"domain": "al"})
    p = tmp_path / "m.json"
    write_mesh_json(p, m)
    back = read_mesh_json(p)
    assert back.content_hash() == m.content_hash()
    assert back.region_materials == {"domain": "al"}


def test_mesh_json_rejects_unknown_keys():
    d = mesh_to_dict(generate_quad_mesh((0, 1), (0, 1), 1, 1))
    d["colour"] = "red"
    with pytest.raises(ConfigurationError, match="colour"):
        mesh_from_dict(d)
    d = mesh_to_dict(generate_quad_mesh((0, 1), (0, 1), 1, 1))
    d["elements"][0]["extra"] = 1
    with pytest.raises(ConfigurationError):
        mesh_from_dict(d)


def test_vtk_golden_square(tmp_path):
    m = generate_quad_mesh((0.0, 1.0), (0.0, 1.0), 1, 1)
    p = tmp_path / "sq.vtk"
    write_vtk(p, m, point_data={"temperature": np.array([0.0, 1.0, 1.0, 0.0])}, title="unit square")
    with open(os.path.join(GOLDEN, "square.vtk"), "rb") as fh:
        assert p.read_bytes() == fh.read()


def test_vtk_counts_vectors_and_errors(tmp_path):
    m = generate_polygonal_mesh(rectangle_domain((0, 1), (0, 1)), 20, seed=1)
    p = tmp_path / "m.vtk"
    write_vtk(p, m, point_data={"u": np.zeros((m.n_nodes, 2))}, cell_data={"vm": np.ones(m.n_elements)})
    assert read_vtk_counts(p) == (m.n_nodes, m.n_elements)
    text = p.read_text()
    assert "VECTORS u double" in text and "CELL_DATA 20" in text
    with pytest.raises(ValueError):
        write_vtk(tmp_path / "bad.vtk", m, point_data={"t": np.zeros(3)})


def _config_dict(**over):
    d = {
        "method": "sfvem",
        "materials": {"steel": {"E": 2e5, "nu": 0.3, "alpha": 1e-5, "conductivity": 50.0}},
        "regions": {"domain": "steel"},
        "bcs": [{"kind": "dirichlet", "field": "thermal", "target": "left", "value": 80.0},
                {"kind": "dirichlet", "field": "thermal", "target": "right", "value": 25.0},
                {"kind": "dirichlet", "field": "mechanical", "target": "left", "value": [0.0, 0.0]},
                {"kind": "neumann", "field": "mechanical", "target": "right", "value": [1.0, 0.0]}],
        "mesh_generator": {"type": "quad", "x_range": [0, 10], "y_range": [0, 2], "nx": 10, "ny": 2},
    }
    d.update(over)
    return d


def test_config_round_trip(tmp_path):
    cfg = RunConfig.from_dict(_config_dict(uniform_order=3, T_ref=20.0))
    p = tmp_path / "c.json"
    save_config(p, cfg)
    back = load_config(p)
    assert back == cfg
    assert back.config_hash() == cfg.config_hash()
    assert RunConfig.from_dict(json.loads(cfg.to_json())) == cfg


@pytest.mark.parametrize("bad", [
    {"colour": 1}, {"method": "fem"}, {"tau_h": 0.0}, {"mode": "axisymmetric"},
    {"materials": {"x": {"E": 1.0}}}, {"materials": {"x": {"E": 1.0, "nu": 0.2, "rho": 1}}},
    {"bcs": [{"kind": "dirichlet", "field": "thermal"}]}, {"mesh": "m.json"},
    {"mesh_generator": {"type": "hex"}}, {"uniform_order": 0}])
def test_config_rejects_invalid(bad):
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict(_config_dict(**bad))


def test_manifest_fields():
    cfg = RunConfig.from_dict(_config_dict())
    m = cfg.build_mesh()
    man = manifest(cfg, m)
    assert man["config_hash"] == cfg.config_hash() and man["mesh_hash"] == m.content_hash()
    assert man["method"] == "sfvem" and man["units"]["length"] == "mm"
    assert {"version", "backend"} <= set(man)


# -------------------------------------------------------------------------- CLI


def test_cli_usage_errors(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err
    assert main(["frobnicate"]) == 1
    assert main(["benchmark", "cylinder", "--method", "fem"]) == 1
    assert main(["--version"]) == 0


def test_cli_runtime_errors(tmp_path):
    assert main(["solve-thermal", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(_config_dict(colour=1)))
    assert main(["solve-thermal", "--config", str(bad)]) == 2


def test_cli_solve_thermal_strip(tmp_path):
    cfg = tmp_path / "strip.json"
    shutil.copy(os.path.join(CONFIGS, "strip_thermal.json"), cfg)
    out = tmp_path / "res"
    assert main(["solve-thermal", "--config", str(cfg), "--out-dir", str(out)]) == 0
    for name in ("result.vtk", "mesh.json", "result.npz", "report.json", "manifest.json"):
        assert (out / name).exists()
    data = np.load(out / "result.npz")
    T = data["temperature"]
    assert T.min() >= 25.0 - 1e-9 and T.max() <= 80.0 + 1e-9
    mesh = read_mesh_json(out / "mesh.json")
    assert np.abs(T - (80.0 - 5.5 * mesh.nodes[:, 0])).max() <= 1e-9
    assert read_vtk_counts(out / "result.vtk") == (mesh.n_nodes, mesh.n_elements)
    man = json.loads((out / "manifest.json").read_text())
    assert man["mesh_hash"] == mesh.content_hash()

    prof = tmp_path / "line.csv"
    assert main(["extract-line", "--result-dir", str(out), "--field", "temperature",
                 "--polyline", "0", "1", "10", "1", "--samples", "11", "--out", str(prof)]) == 0
    s, v = read_profile_csv(prof)
    assert np.allclose(v, 80.0 - 5.5 * s, atol=1e-9)
    assert main(["extract-line", "--result-dir", str(out), "--field", "sxx",
                 "--polyline", "0", "1", "10", "1", "--out", str(prof)]) == 2
    assert main(["extract-line", "--result-dir", str(out), "--field", "temperature",
                 "--polyline", "0", "1", "20", "1", "--out", str(prof)]) == 2


def test_cli_solve_coupled(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(_config_dict(T_ref=25.0, mode="plane-strain")))
    out = tmp_path / "res"
    assert main(["solve-coupled", "--config", str(cfg), "--out-dir", str(out), "--method", "vem"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["elastic_residual"] <= 1e-10 and rep["max_von_mises"] > 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["method"] == "vem"
    assert main(["extract-line", "--result-dir", str(out), "--field", "von_mises_nodal",
                 "--polyline", "1", "0.5", "9", "0.5", "--out", str(tmp_path / "vm.csv")]) == 0


def test_cli_mesh_gen_and_merge(tmp_path):
    a, b, c = (str(tmp_path / n) for n in ("a.json", "b.json", "c.json"))
    assert main(["mesh-gen", "--kind", "quad", "--nx", "1", "--ny", "1", "--out", a]) == 0
    assert main(["mesh-gen", "--kind", "polygon", "--x-range", "1", "2", "--n-seeds", "6",
                 "--region", "poly", "--out", b]) == 0
    assert main(["merge", a, b, "--tag-a", "right", "--tag-b", "left", "--out", c]) == 0
    m = read_mesh_json(c)
    assert m.n_elements == 7
    assert m.total_area() == pytest.approx(2.0)
    assert main(["merge", a, b, "--tag-a", "right", "--tag-b", "nowhere", "--out", c]) == 2


def test_cli_small_cylinder_benchmark(tmp_path):
    out = tmp_path / "cyl.json"
    assert main(["benchmark", "cylinder", "--nodes", "96", "--method", "vem", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["n_nodes"] == 96 and rep["eav_r"] > 0 and rep["eav_theta"] > 0
    assert rep["manifest"]["config_hash"]


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "polyvem.cli"], capture_output=True, text=True)
    assert r.returncode == 1 and "usage" in r.stderr and r.stdout == ""
