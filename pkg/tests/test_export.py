import json

import numpy as np
import pytest

from qtfem.export import mesh_from_dict, mesh_to_dict, read_json, vtk_text, write_json, write_vtk
from qtfem.mesh import Domain, generate_mesh


@pytest.mark.parametrize("gen,balance", [("corner", False), ("diag", True), ("grad", True)])
def test_json_round_trip(tmp_path, gen, balance):
    mesh = generate_mesh(gen, 3, balance=balance, domain=Domain((-1.0, 2.0), 2.0, 3.0))
    path = tmp_path / "m.json"
    write_json(mesh, path)
    back = read_json(path)
    assert back.balanced == mesh.balanced
    np.testing.assert_array_equal(back.nodes, mesh.nodes)
    assert [p.node_ids for p in back.polygons] == [p.node_ids for p in mesh.polygons]
    assert back.hanging == mesh.hanging
    assert back.domain == mesh.domain


def test_json_consistency_checks():
    data = mesh_to_dict(generate_mesh("corner", 2))
    json.dumps(data)
    bad = dict(data, nodes=[[9.0, 9.0]] + data["nodes"][1:])
    with pytest.raises(ValueError):
        mesh_from_dict(bad)
    mesh_from_dict(bad, check=False)
    with pytest.raises(ValueError):
        mesh_from_dict(dict(data, format="other"))
    with pytest.raises(ValueError):
        mesh_from_dict(dict(data, version=99))


def test_vtk_layout(tmp_path):
    mesh = generate_mesh("corner", 2)
    text = vtk_text(mesh)
    lines = text.splitlines()
    assert lines[0].startswith("# vtk DataFile")
    assert f"POINTS {mesh.n_nodes} double" in lines
    i = lines.index(f"CELL_TYPES {mesh.n_leaves}")
    assert set(lines[i + 1:i + 1 + mesh.n_leaves]) == {"7"}
    j = [k for k, line in enumerate(lines) if line.startswith("CELLS ")][0]
    for line, poly in zip(lines[j + 1:], mesh.polygons):
        ids = list(map(int, line.split()))
        assert ids[0] == poly.n and tuple(ids[1:]) == poly.node_ids
    assert "SCALARS hanging int 1" in lines
    write_vtk(mesh, tmp_path / "m.vtk")
    assert (tmp_path / "m.vtk").read_text() == text


def test_failed_write_leaves_nothing(tmp_path):
    mesh = generate_mesh("uniform", 1)
    with pytest.raises(OSError):
        write_json(mesh, tmp_path / "missing" / "m.json")
    assert list(tmp_path.iterdir()) == []
