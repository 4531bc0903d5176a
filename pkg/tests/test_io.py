from __future__ import annotations

import numpy as np
import pytest

from bijmap.errors import MeshError, ProblemFileError
from bijmap.fixtures import grid_disk
from bijmap.io import (build_problem, format_problem, load_images, load_problem, parse_problem,
                       read_mesh, write_obj, write_off)

TWO_TRIANGLES = """OFF
4 2 0
0 0 0
1 0 0
1 1 0
0 1 0
3 0 1 2
3 0 2 3
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_two_triangle_off(tmp_path):
    mesh, notes = read_mesh(_write(tmp_path, "sq.off", TWO_TRIANGLES))
    assert (mesh.n_vertices, mesh.n_faces) == (4, 2)
    assert mesh.ambient_dim == 2
    assert len(mesh.boundary.loops) == 1 and len(mesh.boundary.loops[0]) == 4
    assert notes == []


def test_mixed_winding_is_repaired_with_a_note(tmp_path):
    text = TWO_TRIANGLES.replace("3 0 2 3", "3 0 3 2")
    mesh, notes = read_mesh(_write(tmp_path, "sq.off", text))
    assert mesh.n_faces == 2
    assert any("reoriented" in n for n in notes)
    assert np.all(mesh.face_volumes > 0)


def test_clockwise_mesh_is_flipped(tmp_path):
    text = TWO_TRIANGLES.replace("3 0 1 2", "3 0 2 1").replace("3 0 2 3", "3 0 3 2")
    mesh, notes = read_mesh(_write(tmp_path, "sq.off", text))
    assert any("counterclockwise" in n for n in notes)


def test_bad_meshes_raise(tmp_path):
    nonmanifold = """OFF
5 3 0
0 0 0
1 0 0
0 1 0
1 1 0
-1 -1 0
3 0 1 2
3 1 0 3
3 0 1 4
"""
    with pytest.raises(MeshError, match="non-manifold"):
        read_mesh(_write(tmp_path, "nm.off", nonmanifold))
    quad = TWO_TRIANGLES.replace("4 2 0", "4 1 0").replace("3 0 1 2\n3 0 2 3", "4 0 1 2 3")
    with pytest.raises(MeshError, match="triangles"):
        read_mesh(_write(tmp_path, "quad.off", quad))
    unref = TWO_TRIANGLES.replace("4 2 0", "5 2 0").replace("0 1 0\n", "0 1 0\n7 7 0\n")
    with pytest.raises(MeshError, match="unreferenced"):
        read_mesh(_write(tmp_path, "unref.off", unref))
    with pytest.raises(MeshError, match="truncated"):
        read_mesh(_write(tmp_path, "short.off", TWO_TRIANGLES.rsplit("3 0 2 3", 1)[0]))
    with pytest.raises(MeshError, match="unsupported"):
        read_mesh(_write(tmp_path, "sq.ply", TWO_TRIANGLES))
    with pytest.raises(MeshError, match="triangles"):
        read_mesh(_write(tmp_path, "q.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"))


def test_obj_round_trip(tmp_path):
    P = grid_disk(4)
    p = tmp_path / "g.obj"
    write_obj(p, P.mesh)
    mesh, _ = read_mesh(p)
    np.testing.assert_allclose(mesh.vertices, P.mesh.vertices, atol=1e-12)
    np.testing.assert_array_equal(mesh.top_faces, P.mesh.top_faces)
    q = tmp_path / "g.off"
    write_off(q, P.mesh)
    assert np.array_equal(read_mesh(q)[0].vertices, P.mesh.vertices)


def test_load_images_reads_folded_maps(tmp_path):
    P = grid_disk(3)
    images = P.mesh.vertices * (-1.0, 1.0)  # every face reversed
    p = tmp_path / "m.obj"
    write_obj(p, P.mesh, images)
    np.testing.assert_array_equal(load_images(p, P.mesh), images)
    with pytest.raises(MeshError):
        load_images(p, grid_disk(2).mesh)


def _problem_dir(tmp_path, **kw):
    _write(tmp_path, "sq.off", TWO_TRIANGLES)
    text = format_problem(mesh_path="sq.off", polygon=[(0, 0), (2, 0), (2, 2), (0, 2)],
                          corners=[0, 1, 2, 3], **kw)
    return _write(tmp_path, "p.txt", text)


def test_problem_round_trip(tmp_path):
    lp = load_problem(_problem_dir(tmp_path, K=7, mode="fixed-uniform", seed=4))
    assert lp.mode == "fixed-uniform" and lp.seed == 4
    assert lp.params.K == 7
    assert lp.polygon.n_edges == 4
    assert lp.assignment.polyedge(0, 1) == 0
    assert lp.eps_con == pytest.approx(1e-8 * 2 * np.sqrt(2))


def test_problem_errors_carry_line_numbers(tmp_path):
    cases = [
        ("mesh a.off\npolygon 0 0 1 0\n", 2, "even number"),
        ("mesh a.off\nbogus 3\n", 2, "unknown directive"),
        ("mesh a.off\npolygon 0 0 1 0 0 1\ncorners 0 1 2\nK x\n", 4, "number"),
        ("mesh a.off\nmesh b.off\n", 2, "duplicate"),
        ("mesh a.off\npolygon 0 0 1 0 0 1\ncorners 0 1 2\nmode fast\n", 4, "mode"),
        ("mesh a.off\npolygon 0 0 1 0 0 1\n", 2, "corners"),
    ]
    for text, line, msg in cases:
        with pytest.raises(ProblemFileError, match=msg) as info:
            parse_problem(text, "p.txt")
        assert info.value.lineno == line
        assert "p.txt:" in str(info.value)


def test_problem_geometry_errors_point_at_their_line(tmp_path):
    _write(tmp_path, "sq.off", TWO_TRIANGLES)
    text = "mesh sq.off\n# target\npolygon 0 0 0 1 1 1 1 0\ncorners 0 1 2 3\n"
    with pytest.raises(ProblemFileError, match="counterclockwise") as info:
        load_problem(_write(tmp_path, "p.txt", text))
    assert info.value.lineno == 3
    text = "mesh missing.off\npolygon 0 0 1 0 1 1 0 1\ncorners 0 1 2 3\n"
    with pytest.raises(ProblemFileError) as info:
        load_problem(_write(tmp_path, "p2.txt", text))
    assert info.value.lineno == 1


def test_collinear_polygon_edges_are_merged_and_remapped(tmp_path):
    _write(tmp_path, "sq.off", TWO_TRIANGLES)
    # the bottom side is written as two edges; mesh edge (3, 0) goes to written edge 4
    text = ("mesh sq.off\npolygon 0 0 1 0 2 0 2 2 0 2\n"
            "assign 0 1 0\nassign 1 2 2\nassign 2 3 3\nassign 3 0 4\n")
    pf = parse_problem(text, tmp_path / "p.txt")
    lp = build_problem(pf)
    assert lp.polygon.n_edges == 4
    assert lp.assignment.polyedge(0, 1) == 0
    assert lp.assignment.polyedge(3, 0) == 3
    assert any("merged" in n for n in lp.notes)
