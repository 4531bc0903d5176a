"""Small generated meshes and hand-built maps used by tests, demos and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maps import SimplicialMap
from .mesh import SimplicialMesh
from .polygon import BoundaryAssignment, Polygon


@dataclass(frozen=True)
class Problem:
    """A source mesh, a target polygon and a boundary assignment."""

    name: str
    mesh: SimplicialMesh
    polygon: Polygon
    assignment: BoundaryAssignment
    corners: tuple[int, ...]


def _grid_faces(n_x: int, n_y: int, index, flip) -> list[tuple[int, int, int]]:
    faces = []
    for i in range(n_x):
        for j in range(n_y):
            a, b = index(i, j), index(i + 1, j)
            c, d = index(i + 1, j + 1), index(i, j + 1)
            if None in (a, b, c, d):
                continue
            if flip(i, j):
                faces += [(a, b, d), (b, c, d)]
            else:
                faces += [(a, b, c), (a, c, d)]
    return faces


def grid_disk(n: int = 10) -> Problem:
    """An (n+1) x (n+1) grid squeezed onto the unit disk, to be mapped onto the unit square.

    The square-to-disk map is the elliptical one, so grid corners land at
    45 degrees on the circle.  Cell diagonals run toward the nearest grid
    corner, which keeps every triangle at the four corners from having all
    its vertices on the boundary.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    u = np.linspace(-1.0, 1.0, n + 1)
    X, Y = np.meshgrid(u, u, indexing="ij")
    xd = X * np.sqrt(1.0 - Y ** 2 / 2.0)
    yd = Y * np.sqrt(1.0 - X ** 2 / 2.0)
    verts = np.stack([xd.ravel(), yd.ravel()], axis=1)
    idx = lambda i, j: i * (n + 1) + j
    half = n / 2.0
    # "/" diagonals in the lower-left and upper-right quadrants, "\" elsewhere.
    faces = _grid_faces(n, n, idx, lambda i, j: (i + 0.5 < half) != (j + 0.5 < half))
    mesh = SimplicialMesh(verts, faces)
    polygon = Polygon([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    corners = (idx(0, 0), idx(n, 0), idx(n, n), idx(0, n))
    return Problem("grid_disk", mesh, polygon,
                   BoundaryAssignment.from_corners(mesh, polygon, corners), corners)


L_TARGET = [(0.0, 0.0), (2.5, 0.0), (2.5, 0.8), (0.8, 0.8), (0.8, 1.6), (0.0, 1.6)]


def lshape(m: int = 6, target=None) -> Problem:
    """Three unit squares forming an L, each split into m x m cells, mapped onto a thinner L."""
    if m < 1:
        raise ValueError("m must be positive")
    N = 2 * m
    ids: dict[tuple[int, int], int] = {}
    pts = []
    for i in range(N + 1):
        for j in range(N + 1):
            if i > m and j > m:
                continue
            ids[(i, j)] = len(pts)
            pts.append((i / m, j / m))

    def idx(i, j):
        return ids.get((i, j))

    def cell_ok(i, j):
        return not (i >= m and j >= m)

    # "/" diagonals in the corner block, "\" in the two arms.
    faces = []
    for i in range(N):
        for j in range(N):
            if not cell_ok(i, j):
                continue
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            if (i < m) == (j < m):
                faces += [(a, b, c), (a, c, d)]
            else:
                faces += [(a, b, d), (b, c, d)]
    mesh = SimplicialMesh(np.array(pts, dtype=float), faces)
    polygon = Polygon(L_TARGET if target is None else target)
    corners = (idx(0, 0), idx(N, 0), idx(N, m), idx(m, m), idx(m, N), idx(0, N))
    return Problem("lshape", mesh, polygon,
                   BoundaryAssignment.from_corners(mesh, polygon, corners), corners)


def fan(n_outer: int) -> SimplicialMesh:
    """A disk fan: vertex 0 at the origin, n_outer vertices on the unit circle."""
    ang = 2.0 * np.pi * np.arange(n_outer) / n_outer
    verts = np.vstack([[0.0, 0.0], np.stack([np.cos(ang), np.sin(ang)], axis=1)])
    faces = [(0, 1 + k, 1 + (k + 1) % n_outer) for k in range(n_outer)]
    return SimplicialMesh(verts, faces)


def fold_map() -> tuple[SimplicialMap, Polygon, BoundaryAssignment]:
    """Four-triangle fan whose centre is dragged outside so one face flips.

    The boundary map is the identity onto the diamond, which is a bijection,
    so only the orientation condition catches the fold.
    """
    mesh = fan(4)
    images = mesh.vertices.copy()
    images[0] = (0.8, 0.8)
    polygon = Polygon(mesh.vertices[1:])
    table = {(1 + k, 1 + (k + 1) % 4): k for k in range(4)}
    return SimplicialMap(mesh, images), polygon, BoundaryAssignment.build(mesh, polygon, table)


WRAP_QUERY = np.array([0.0, 0.0])


def wrap_map(n_outer: int = 10) -> SimplicialMap:
    """Fan whose boundary winds twice around the centre image.

    Every face keeps its orientation.  The centre vertex, imaged at
    :data:`WRAP_QUERY`, has a single pre-image but boundary degree 2.
    """
    if n_outer % 2 or n_outer < 6:
        raise ValueError("n_outer must be even and at least 6")
    mesh = fan(n_outer)
    k = np.arange(n_outer)
    ang = 4.0 * np.pi * k / n_outer
    r = np.where(k < n_outer // 2, 1.0, 1.3)
    images = np.vstack([WRAP_QUERY, np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)])
    return SimplicialMap(mesh, images)


_FIG4_NAMES = ("O0", "O1", "O2", "a", "b", "T", "c", "d", "e", "f", "g", "k")
_FIG4_SOURCE = [(0, 0), (1, 0), (2, 0), (2, 1), (1.5, 1), (1.25, 1), (1, 1), (1, 2), (0, 2),
                (0, 0.8), (1, 0.5), (0.3, 0.93)]
_FIG4_IMAGE = [(0, 0), (1, 0), (2, 0), (2, 1), (1.5, 1), (0.5, 1), (1, 1), (1, 2), (0, 2),
               (0, 1), (1, 0.5), (0.5, 1.5)]
_FIG4_FACES = [("g", "O0", "O1"), ("g", "O1", "O2"), ("g", "O2", "a"), ("g", "a", "b"),
               ("g", "b", "T"), ("g", "T", "f"), ("g", "f", "O0"), ("k", "f", "T"),
               ("k", "T", "c"), ("k", "c", "d"), ("k", "d", "e"), ("k", "e", "f")]
_FIG4_ASSIGN = {("O0", "O1"): 0, ("O1", "O2"): 0, ("O2", "a"): 1, ("a", "b"): 2,
                ("b", "T"): 2, ("T", "c"): 2, ("c", "d"): 3, ("d", "e"): 4,
                ("e", "f"): 5, ("f", "O0"): 5}
FIG4_POLYGON = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]


def overshoot_map() -> tuple[SimplicialMap, Polygon, BoundaryAssignment]:
    """An L-shaped map whose boundary overshoots the reflex corner and folds back.

    Boundary vertex T lies on the line of its assigned edge but past the
    reflex corner, inside the polygon; the chain a, b, T, c therefore runs
    backwards along that edge.  Every triangle stays positively oriented and
    the interior is covered exactly once, yet the boundary map is not
    injective.
    """
    pos = {n: i for i, n in enumerate(_FIG4_NAMES)}
    mesh = SimplicialMesh(np.array(_FIG4_SOURCE, dtype=float),
                          [tuple(pos[v] for v in f) for f in _FIG4_FACES])
    polygon = Polygon(FIG4_POLYGON)
    table = {(pos[a], pos[b]): k for (a, b), k in _FIG4_ASSIGN.items()}
    phi = SimplicialMap(mesh, np.array(_FIG4_IMAGE, dtype=float))
    return phi, polygon, BoundaryAssignment.build(mesh, polygon, table)
