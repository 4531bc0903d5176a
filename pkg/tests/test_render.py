from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from bijmap.fixtures import fold_map
from bijmap.maps import SimplicialMap
from bijmap.render import ramp, render_svg


def test_ramp_end_points_and_constant():
    assert ramp([1.0, 3.0]) == ["#2846dc", "#dc2828"]
    mid = ramp([2.0, 2.0, 2.0])
    assert len(set(mid)) == 1
    assert mid[0] == ramp([0.0, 0.5, 1.0])[1]


def test_ramp_clips_to_given_range():
    assert ramp([-5.0, 5.0], vmin=0, vmax=1) == ["#2846dc", "#dc2828"]


def test_identity_map_has_uniform_color():
    phi, poly, _ = fold_map()
    ident = SimplicialMap(phi.mesh, phi.mesh.vertices)
    svg = render_svg(ident, poly, "gradient_norm")
    root = ET.fromstring(svg)
    fills = {el.get("fill") for el in root.iter() if el.tag.endswith("polygon")
             and el.get("class") == "face"}
    assert len(fills) == 1


def test_svg_is_deterministic_and_well_formed():
    phi, poly, _ = fold_map()
    a = render_svg(phi, poly, "gradient_norm")
    b = render_svg(SimplicialMap(phi.mesh, np.array(phi.images)), poly, "gradient_norm")
    assert a == b
    ET.fromstring(a)
    ET.fromstring(render_svg(phi))


def test_bad_coloring_raises():
    phi, _, _ = fold_map()
    with pytest.raises(ValueError):
        render_svg(phi, coloring="rainbow")
