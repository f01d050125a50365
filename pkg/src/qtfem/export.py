"""Mesh files: a JSON description and a legacy VTK ASCII polygon file.

JSON layout (``format = "qtfem-mesh"``, ``version = 1``)::

    domain    {"origin": [x, y], "width": w, "height": h}
    balanced  bool, whether 2:1 balancing was applied
    leaves    [[level, ix, iy], ...]
    nodes     [[x, y], ...]            node id = list index
    polygons  [[node ids, CCW], ...]   one per leaf, same order as leaves
    hanging   {"node id": [master a, master b], ...}

The leaves fully determine the mesh; nodes, polygons and hanging are
written for consumers that do not rebuild the quadtree and are checked
on import.

All writers go through a temporary file in the target directory that is
renamed into place, so a failed write leaves nothing behind.
"""
import json
import os
import tempfile

import numpy as np

from .mesh import Domain, QuadtreeMesh

FORMAT = "qtfem-mesh"
VERSION = 1
VTK_POLYGON = 7


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary sibling and ``os.replace``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def mesh_to_dict(mesh):
    d = mesh.domain
    return {
        "format": FORMAT,
        "version": VERSION,
        "domain": {"origin": list(d.origin), "width": d.width, "height": d.height},
        "balanced": bool(mesh.balanced),
        "leaves": [list(k) for k in mesh.leaves],
        "nodes": np.asarray(mesh.nodes).tolist(),
        "polygons": [list(p.node_ids) for p in mesh.polygons],
        "hanging": {str(k): list(v) for k, v in sorted(mesh.hanging.items())},
    }


def mesh_from_dict(data, check=True):
    """Rebuild a mesh; with ``check`` the stored derived data must match."""
    if data.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} document")
    if data.get("version") != VERSION:
        raise ValueError(f"unsupported {FORMAT} version {data.get('version')!r}")
    dom = data["domain"]
    domain = Domain(tuple(dom["origin"]), dom["width"], dom["height"])
    mesh = QuadtreeMesh.from_leaves(domain, data["leaves"], data["balanced"])
    if check:
        if not np.array_equal(np.asarray(data["nodes"], dtype=float), mesh.nodes):
            raise ValueError("stored node coordinates disagree with the leaves")
        if [list(p.node_ids) for p in mesh.polygons] != [list(p) for p in data["polygons"]]:
            raise ValueError("stored polygons disagree with the leaves")
        hanging = {int(k): tuple(v) for k, v in data["hanging"].items()}
        if hanging != {k: tuple(v) for k, v in mesh.hanging.items()}:
            raise ValueError("stored hanging map disagrees with the leaves")
    return mesh


def write_json(mesh, path):
    atomic_write_text(path, json.dumps(mesh_to_dict(mesh), indent=1) + "\n")


def read_json(path, check=True):
    with open(path) as fh:
        return mesh_from_dict(json.load(fh), check)


def vtk_text(mesh, title="qtfem quadtree mesh"):
    """Legacy VTK unstructured grid with one polygon cell per leaf.

    Cell data: ``level`` (quadtree level) and ``n_vertices``; point data:
    ``hanging`` (1 for hanging nodes).
    """
    nodes = np.asarray(mesh.nodes)
    polys = [p.node_ids for p in mesh.polygons]
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {len(nodes)} double"]
    lines += [f"{x:.17g} {y:.17g} 0" for x, y in nodes]
    size = sum(len(p) + 1 for p in polys)
    lines.append(f"CELLS {len(polys)} {size}")
    lines += [" ".join(map(str, (len(p),) + tuple(p))) for p in polys]
    lines.append(f"CELL_TYPES {len(polys)}")
    lines += [str(VTK_POLYGON)] * len(polys)
    lines.append(f"CELL_DATA {len(polys)}")
    lines += ["SCALARS level int 1", "LOOKUP_TABLE default"]
    lines += [str(k[0]) for k in mesh.leaves]
    lines += ["SCALARS n_vertices int 1", "LOOKUP_TABLE default"]
    lines += [str(len(p)) for p in polys]
    flag = np.zeros(len(nodes), dtype=int)
    flag[list(mesh.hanging)] = 1
    lines.append(f"POINT_DATA {len(nodes)}")
    lines += ["SCALARS hanging int 1", "LOOKUP_TABLE default"]
    lines += [str(v) for v in flag]
    return "\n".join(lines) + "\n"


def write_vtk(mesh, path):
    atomic_write_text(path, vtk_text(mesh))
