from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bijmap.certify import (Certificate, boundary_bijection_evidence, certify_T1, certify_T2,
                            certify_T3, check_necessary, monotone_chain_violations)
from bijmap.degree import preimage_count
from bijmap.errors import AssignmentError
from bijmap.fixtures import fold_map, grid_disk, overshoot_map, wrap_map
from bijmap.maps import SimplicialMap, harmonic_map
from bijmap.polygon import BoundaryAssignment, Polygon, boundary_runs, uniform_boundary_positions

from oracles import brute_preimages


def _tutte(P):
    return harmonic_map(P.mesh, uniform_boundary_positions(P.mesh, P.polygon, P.assignment))


def _kinds(cert):
    return [e["kind"] for e in cert.evidence]


def test_certificate_rejects_evidence_on_certified():
    with pytest.raises(ValueError):
        Certificate("T1", "certified", ({"kind": "x"},))
    with pytest.raises(ValueError):
        Certificate("T1", "maybe")


def test_tutte_map_is_certified_everywhere():
    P = grid_disk(3)
    phi = _tutte(P)
    for cert in (check_necessary(phi), certify_T1(phi, P.polygon),
                 certify_T2(phi, P.polygon, P.assignment),
                 certify_T3(phi, P.polygon, P.assignment)):
        assert cert.certified and cert.evidence == ()
    d = certify_T1(phi, P.polygon).to_dict()
    assert d["verdict"] == "certified" and d["tolerances"]["eps_con"] > 0


def test_identity_onto_own_outline_is_certified():
    phi, poly, _ = fold_map()
    ident = SimplicialMap(phi.mesh, phi.mesh.vertices)
    assert certify_T1(ident, poly).certified


def test_tutte_5x5_is_certified():
    P = grid_disk(4)
    assert certify_T1(_tutte(P), P.polygon)


def test_fold_is_refuted_with_the_flipped_face():
    phi, poly, A = fold_map()
    for cert in (check_necessary(phi), certify_T1(phi, poly), certify_T2(phi, poly, A)):
        assert not cert
        reversed_faces = [e["face"] for e in cert.evidence if e["kind"] == "reversed_face"]
        assert 0 in reversed_faces
    # its boundary alone is a bijection
    loop = phi.mesh.boundary.loops[0]
    assert boundary_bijection_evidence(phi.images[list(loop)], loop, poly, 1e-9) == []


def test_reflected_map_is_refuted():
    P = grid_disk(3)
    phi = _tutte(P)
    mirrored = SimplicialMap(P.mesh, phi.images * (-1.0, 1.0))
    cert = check_necessary(mirrored)
    assert not cert
    assert len(cert.evidence) == P.mesh.n_faces


def test_collapsed_vertex_is_refuted_as_degenerate():
    P = grid_disk(3)
    phi = _tutte(P)
    images = phi.images.copy()
    a, b = P.mesh.top_faces[0][:2]
    images[b] = images[a]
    cert = certify_T1(SimplicialMap(P.mesh, images), P.polygon)
    assert "degenerate_face" in _kinds(cert)


def test_wrap_is_refuted_by_T1():
    phi = wrap_map()
    ang = 2 * np.pi * np.arange(10) / 10
    poly = Polygon(np.stack([np.cos(ang), np.sin(ang)], axis=1))
    assert check_necessary(phi)
    assert not certify_T1(phi, poly)


def test_overshoot_is_T2_but_not_T1_or_T3():
    phi, poly, A = overshoot_map()
    assert certify_T2(phi, poly, A).certified
    t1 = certify_T1(phi, poly)
    assert not t1
    off = [e for e in t1.evidence if e["kind"] == "off_boundary"]
    assert off and off[0]["residual"] == pytest.approx(0.5)
    t3 = certify_T3(phi, poly, A)
    assert not t3
    assert any(e["kind"] == "reversed_edge" and e["polygon_edge"] == 2 for e in t3.evidence)


def test_off_line_vertex_is_refuted_with_residual():
    P = grid_disk(3)
    phi = _tutte(P)
    runs = boundary_runs(P.mesh, P.assignment, 4)
    v = runs[0][1]  # a non-corner vertex on the bottom edge
    images = phi.images.copy()
    images[v, 1] -= 1e-3
    bad = SimplicialMap(P.mesh, images)
    cert = certify_T2(bad, P.polygon, P.assignment)
    assert not cert
    res = [e["residual"] for e in cert.evidence if e["kind"] == "pin_violated"]
    assert res == [pytest.approx(1e-3)]
    assert any(e["kind"] == "edge_off_line" for e in cert.evidence)
    assert not certify_T1(bad, P.polygon)


def test_swapped_boundary_images_are_refuted_by_T3():
    P = grid_disk(4)
    phi = _tutte(P)
    run = boundary_runs(P.mesh, P.assignment, 4)[0]
    u, v = run[1], run[2]
    images = phi.images.copy()
    images[[u, v]] = images[[v, u]]
    cert = certify_T3(SimplicialMap(P.mesh, images), P.polygon, P.assignment)
    rev = [e for e in cert.evidence if e["kind"] == "reversed_edge"]
    assert rev and rev[0]["polygon_edge"] == 0 and rev[0]["edge"] == [u, v]


def test_infeasible_assignment_raises():
    P = grid_disk(3)
    loop = P.mesh.boundary.loops[0]
    seq = [0, 0, 1, 1, 2, 2, 3, 3, 0, 1, 2, 3]
    table = {(loop[i], loop[(i + 1) % 12]): k for i, k in enumerate(seq)}
    A = BoundaryAssignment.build(P.mesh, P.polygon, table)
    phi = _tutte(P)
    with pytest.raises(AssignmentError):
        certify_T2(phi, P.polygon, A)
    with pytest.raises(AssignmentError):
        certify_T3(phi, P.polygon, A)


def test_monotone_chain_examples():
    assert monotone_chain_violations([0, 0.3, 1], 0, 1, eps_end=1e-9, eps_mono=1e-9) == []
    kinds = [v["kind"] for v in
             monotone_chain_violations([0.1, 0.5, 0.4, 0.4, 1.2], 0, 1, eps_end=1e-9,
                                       eps_mono=1e-9)]
    assert kinds == ["run_start", "run_end", "reversed_edge", "non_strict"]


def test_boundary_evidence_flags_corner_skips():
    P = grid_disk(3)
    loop = list(P.mesh.boundary.loops[0])
    pts = _tutte(P).images[loop].copy()
    # slide the vertex after corner 1 back onto the bottom edge, so the next edge cuts the corner
    i = loop.index(P.corners[1])
    pts[i] = (0.9, 0.0)
    kinds = [e["kind"] for e in boundary_bijection_evidence(pts, loop, P.polygon, 1e-9)]
    assert "corner_skipped" in kinds


# ------------------------------------------------------------ properties
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.0, 0.25))
def test_T1_certified_maps_are_bijective(seed, scale):
    """Interior jitter of a Tutte map: whenever T1 certifies, every point
    of the open square has one pre-image and every outside point none."""
    P = grid_disk(4)
    rng = np.random.default_rng(seed)
    phi = _tutte(P)
    images = phi.images.copy()
    interior = np.setdiff1d(np.arange(P.mesh.n_vertices), P.mesh.boundary.loops[0])
    images[interior] += rng.normal(scale=scale / 4, size=(len(interior), 2))
    phi = SimplicialMap(P.mesh, images)
    cert = certify_T1(phi, P.polygon)
    qs = rng.uniform(-0.2, 1.2, size=(30, 2))
    if not cert:
        return
    for q in qs:
        if P.polygon.distance_to_boundary(q)[0] < 1e-6:
            continue
        brute = brute_preimages(P.mesh.vertices, images, P.mesh.top_faces, q)
        expected = 1 if P.polygon.contains(q)[0] else 0
        assert preimage_count(phi, q).count == expected == brute
