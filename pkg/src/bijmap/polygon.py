"""Planar target polygons and boundary assignments onto their edges."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import AssignmentError, ParameterError, UnsupportedTopologyError
from .mesh import SimplicialMesh

EdgeKey = tuple[int, int]


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _cross(q2 - q1, p1 - q1)
    d2 = _cross(q2 - q1, p2 - q1)
    d3 = _cross(p2 - p1, q1 - p1)
    d4 = _cross(p2 - p1, q2 - p1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 != 0 and d3 * d4 != 0:
        return True

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    return ((d1 == 0 and on_seg(q1, q2, p1)) or (d2 == 0 and on_seg(q1, q2, p2))
            or (d3 == 0 and on_seg(p1, p2, q1)) or (d4 == 0 and on_seg(p1, p2, q2)))


class Polygon:
    """A simple, counterclockwise polygon with no collinear adjacent edges.

    Edge ``i`` runs from vertex ``i`` to vertex ``i + 1`` (cyclically).  Use
    :meth:`from_points` to merge collinear runs and drop repeated points.
    """

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ParameterError("polygon vertices must be an (E, 2) array")
        if len(v) < 3:
            raise ParameterError("polygon needs at least 3 vertices (zero area)")
        v.setflags(write=False)
        self.vertices = v
        self._validate()

    @classmethod
    def from_points(cls, points) -> tuple[Polygon, list[int]]:
        """Build a polygon, merging collinear adjacent edges.

        Returns the polygon and, for every input edge, the index of the merged
        edge that contains it.
        """
        pts = np.array(points, dtype=float)
        n = len(pts)
        if n < 3:
            raise ParameterError("polygon needs at least 3 vertices (zero area)")
        scale = max(float(np.ptp(pts, axis=0).max()), np.finfo(float).tiny)
        keep = []
        for i in range(n):
            prev, cur, nxt = pts[i - 1], pts[i], pts[(i + 1) % n]
            if np.linalg.norm(cur - prev) <= 1e-12 * scale:
                continue
            a, b = cur - prev, nxt - cur
            if np.linalg.norm(b) <= 1e-12 * scale:
                # Duplicate of the next point; the later copy decides.
                keep.append(i)
                continue
            straight = abs(_cross(a, b)) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(b)
            if straight and np.dot(a, b) > 0:
                continue
            keep.append(i)
        keep = sorted(set(keep))
        if len(keep) < 3:
            raise ParameterError("polygon has zero area after merging collinear edges")
        # Input edge i (pts[i] -> pts[i+1]) lies in the merged edge starting at
        # the last kept vertex at or before i.
        mapping = []
        for i in range(n):
            starts = [k for k, j in enumerate(keep) if j <= i]
            mapping.append(starts[-1] if starts else len(keep) - 1)
        return cls(pts[keep]), mapping

    # ---------------------------------------------------------------- basics
    @property
    def n_edges(self) -> int:
        return len(self.vertices)

    def edge(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices[i], self.vertices[(i + 1) % self.n_edges]

    @cached_property
    def starts(self) -> np.ndarray:
        return self.vertices

    @cached_property
    def ends(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0)

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.ends - self.starts, axis=1)

    @cached_property
    def directions(self) -> np.ndarray:
        """Unit direction of each edge (the affine hull's direction)."""
        return (self.ends - self.starts) / self.lengths[:, None]

    @cached_property
    def normals(self) -> np.ndarray:
        """Outward unit normals."""
        t = self.directions
        return np.stack([t[:, 1], -t[:, 0]], axis=1)

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Arc-length position of each vertex along the boundary."""
        return np.concatenate([[0.0], np.cumsum(self.lengths)[:-1]])

    @property
    def perimeter(self) -> float:
        return float(self.lengths.sum())

    @property
    def area(self) -> float:
        return float(0.5 * np.sum(_cross(self.starts, self.ends)))

    @property
    def diameter(self) -> float:
        diffs = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((diffs ** 2).sum(-1)).max())

    def __repr__(self) -> str:
        return f"Polygon(E={self.n_edges}, area={self.area:.6g})"

    def _validate(self) -> None:
        v = self.vertices
        E = len(v)
        scale = max(float(np.ptp(v, axis=0).max()), np.finfo(float).tiny)
        if np.any(self.lengths <= 1e-12 * scale):
            raise ParameterError("polygon has repeated consecutive vertices")
        a = self.area
        if abs(a) <= 1e-12 * scale ** 2:
            raise ParameterError("polygon has zero area")
        if a < 0:
            raise ParameterError("polygon vertices must be in counterclockwise order")
        t = self.directions
        turn = _cross(np.roll(t, 1, axis=0), t)
        straight = (np.abs(turn) <= 1e-12) & (np.einsum("ij,ij->i", np.roll(t, 1, axis=0), t) > 0)
        if straight.any():
            raise ParameterError(f"collinear adjacent edges meet at vertices "
                                 f"{np.nonzero(straight)[0].tolist()}; merge them first")
        for i in range(E):
            for j in range(i + 1, E):
                if j == i + 1 or (i == 0 and j == E - 1):
                    continue
                if _segments_intersect(*self.edge(i), *self.edge(j)):
                    raise ParameterError(f"polygon is not simple: edges {i} and {j} intersect")

    # ------------------------------------------------------------ geometry
    def edge_line_residuals(self, points, edge: int) -> np.ndarray:
        """Signed distance of points to the supporting line of ``edge``."""
        p = np.atleast_2d(points)
        return (p - self.starts[edge]) @ self.normals[edge]

    def distance_to_lines(self, points) -> np.ndarray:
        """Distance of each point to the union Z of all edge supporting lines."""
        p = np.atleast_2d(points)
        res = np.einsum("pek,ek->pe", p[:, None, :] - self.starts[None], self.normals)
        return np.abs(res).min(axis=1)

    def _project(self, points):
        p = np.atleast_2d(points)
        rel = p[:, None, :] - self.starts[None]
        t = np.clip(np.einsum("pek,ek->pe", rel, self.directions), 0.0, self.lengths[None])
        foot = self.starts[None] + t[..., None] * self.directions[None]
        dist = np.linalg.norm(p[:, None, :] - foot, axis=2)
        return dist, t

    def distance_to_boundary(self, points) -> np.ndarray:
        dist, _ = self._project(points)
        return dist.min(axis=1)

    def boundary_parameter(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Arc-length parameter in [0, perimeter) of the nearest boundary point.

        Returns (parameter, distance).
        """
        dist, t = self._project(points)
        e = np.argmin(dist, axis=1)
        rows = np.arange(len(e))
        s = self.cumulative[e] + t[rows, e]
        s = np.where(s >= self.perimeter, s - self.perimeter, s)
        return s, dist[rows, e]

    def contains(self, points) -> np.ndarray:
        """Closed containment test (boundary points count as inside)."""
        p = np.atleast_2d(points)
        a, b = self.starts, self.ends
        inside = np.zeros(len(p), dtype=bool)
        for k in range(self.n_edges):
            ya, yb = a[k, 1], b[k, 1]
            cond = (ya > p[:, 1]) != (yb > p[:, 1])
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = a[k, 0] + (p[:, 1] - ya) * (b[k, 0] - a[k, 0]) / (yb - ya)
            inside ^= cond & (p[:, 0] < xint)
        on = self.distance_to_boundary(p) <= 1e-12 * self.diameter
        return inside | on


def _lines_intersection(p1, t1, p2, t2):
    denom = _cross(t1, t2)
    if abs(denom) <= 1e-12:
        return None
    s = _cross(p2 - p1, t2) / denom
    return p1 + s * t1


@dataclass(frozen=True)
class Pin:
    """Constraint on one boundary vertex image: on a line, or at a point."""

    kind: str  # "line" or "pinned"
    point: np.ndarray
    direction: np.ndarray | None = None
    edges: tuple[int, ...] = ()


@dataclass(frozen=True)
class BoundaryAssignment:
    """Assignment of every boundary edge to a polygon edge, plus derived pins.

    ``edge_to_polyedge`` is keyed by sorted vertex pairs.  ``derived_pins``
    records, per boundary vertex, the intersection of the supporting lines of
    the polygon edges assigned to its two boundary edges: a single line when
    they agree, a point when they cross.
    """

    edge_to_polyedge: Mapping[EdgeKey, int]
    derived_pins: Mapping[int, Pin] = field(default_factory=dict)

    @classmethod
    def build(cls, mesh: SimplicialMesh, polygon: Polygon,
              edge_to_polyedge: Mapping[Sequence[int], int]) -> BoundaryAssignment:
        if mesh.dim != 2:
            raise UnsupportedTopologyError("boundary assignments are implemented for d = 2")
        table = {tuple(sorted((int(a), int(b)))): int(k) for (a, b), k in edge_to_polyedge.items()}
        boundary_edges = {k for k, _ in mesh.boundary.facets}
        extra = sorted(set(table) - boundary_edges)
        if extra:
            raise AssignmentError(f"assigned edges are not boundary edges: {extra}")
        missing = sorted(boundary_edges - set(table))
        if missing:
            raise AssignmentError(f"boundary edges without assignment: {missing}")
        bad = sorted({k for k in table.values() if not 0 <= k < polygon.n_edges})
        if bad:
            raise AssignmentError(f"polygon edge indices out of range: {bad}")
        pins = derive_pins(mesh, polygon, table)
        return cls(edge_to_polyedge=table, derived_pins=pins)

    @classmethod
    def from_corners(cls, mesh: SimplicialMesh, polygon: Polygon,
                     corners: Sequence[int]) -> BoundaryAssignment:
        """Assign the boundary run from ``corners[k]`` to ``corners[k+1]`` to edge k.

        ``corners`` lists one boundary vertex per polygon vertex, in boundary
        (counterclockwise) order.
        """
        if len(corners) != polygon.n_edges:
            raise AssignmentError(f"{len(corners)} corners given for a polygon with "
                                  f"{polygon.n_edges} vertices")
        return cls.build(mesh, polygon, corner_table(mesh, corners))

    def polyedge(self, a: int, b: int) -> int:
        return self.edge_to_polyedge[tuple(sorted((a, b)))]


def corner_table(mesh: SimplicialMesh, corners: Sequence[int]) -> dict[EdgeKey, int]:
    """Edge table sending the boundary run between corners k and k+1 to index k."""
    loops = mesh.boundary.loops
    if len(loops) != 1:
        raise UnsupportedTopologyError(f"mesh boundary has {len(loops)} loops; "
                                       "only disk topology is supported")
    loop = list(loops[0])
    pos = {v: i for i, v in enumerate(loop)}
    missing = [c for c in corners if c not in pos]
    if missing:
        raise AssignmentError(f"corner vertices {missing} are not on the boundary")
    start = pos[corners[0]]
    rotated = loop[start:] + loop[:start]
    rpos = {v: i for i, v in enumerate(rotated)}
    idx = [rpos[c] for c in corners]
    if idx != sorted(idx) or len(set(idx)) != len(idx):
        raise AssignmentError("corners are not in boundary order")
    table = {}
    L = len(rotated)
    for k in range(len(corners)):
        lo = idx[k]
        hi = idx[k + 1] if k + 1 < len(idx) else L
        for i in range(lo, hi):
            table[tuple(sorted((rotated[i], rotated[(i + 1) % L])))] = k
    return table


def derive_pins(mesh: SimplicialMesh, polygon: Polygon,
                table: Mapping[EdgeKey, int]) -> dict[int, Pin]:
    incoming: dict[int, int] = {}
    outgoing: dict[int, int] = {}
    for a, b in mesh.boundary.oriented_edges():
        k = table[tuple(sorted((a, b)))]
        outgoing[a] = k
        incoming[b] = k
    pins = {}
    for v in sorted(outgoing):
        ki, ko = incoming[v], outgoing[v]
        pi, ti = polygon.starts[ki], polygon.directions[ki]
        po, to = polygon.starts[ko], polygon.directions[ko]
        if ki == ko:
            pins[v] = Pin("line", pi.copy(), ti.copy(), (ki,))
            continue
        x = _lines_intersection(pi, ti, po, to)
        if x is None:
            if abs(_cross(ti, po - pi)) <= 1e-12 * polygon.diameter:
                pins[v] = Pin("line", pi.copy(), ti.copy(), (ki, ko))
                continue
            raise AssignmentError(f"vertex {v} joins edges assigned to parallel polygon "
                                  f"edges {ki} and {ko}; their supporting lines never meet")
        pins[v] = Pin("pinned", x, None, (ki, ko))
    return pins


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    reason: str | None = None
    uncovered: tuple[int, ...] = ()
    winding: int | None = None

    def __bool__(self) -> bool:
        return self.feasible


def assignment_feasibility(mesh: SimplicialMesh, polygon: Polygon,
                           assignment: BoundaryAssignment) -> Feasibility:
    """Combinatorial test that the assignment is realisable by an orientation
    preserving boundary homeomorphism (disk-topology meshes only).

    Walking the boundary loop in its induced orientation, the assigned polygon
    edge indices must advance by 0 or 1 (mod E) at each step, wind around the
    polygon exactly once, and leave no polygon edge uncovered.
    """
    loops = mesh.boundary.loops
    if len(loops) != 1:
        raise UnsupportedTopologyError(f"mesh boundary has {len(loops)} loops; "
                                       "feasibility is only decided for disk topology")
    loop = loops[0]
    E = polygon.n_edges
    seq = [assignment.polyedge(loop[i], loop[(i + 1) % len(loop)]) for i in range(len(loop))]
    uncovered = tuple(sorted(set(range(E)) - set(seq)))
    if uncovered:
        return Feasibility(False, f"polygon edge(s) {list(uncovered)} receive no mesh edge",
                           uncovered=uncovered)
    advance = 0
    for i in range(len(seq)):
        step = (seq[(i + 1) % len(seq)] - seq[i]) % E
        if step not in (0, 1):
            a, b = loop[(i + 1) % len(loop)], loop[(i + 2) % len(loop)]
            return Feasibility(False, f"assignment jumps from polygon edge {seq[i]} to "
                                      f"{seq[(i + 1) % len(seq)]} at boundary edge ({a}, {b})")
        advance += step
    winding = advance // E
    if winding != 1:
        return Feasibility(False, f"assignment winds {winding} times around the polygon",
                           winding=winding)
    return Feasibility(True, winding=1)


def boundary_runs(mesh: SimplicialMesh, assignment: BoundaryAssignment,
                  n_edges: int) -> dict[int, list[int]]:
    """For a feasible assignment, the vertex path assigned to each polygon edge."""
    loop = list(mesh.boundary.loops[0])
    L = len(loop)
    seq = [assignment.polyedge(loop[i], loop[(i + 1) % L]) for i in range(L)]
    # Rotate so the loop starts where a new polygon edge begins.
    start = next(i for i in range(L) if seq[i] != seq[i - 1]) if len(set(seq)) > 1 else 0
    runs: dict[int, list[int]] = {}
    for j in range(L):
        i = (start + j) % L
        k = seq[i]
        run = runs.setdefault(k, [loop[i]])
        run.append(loop[(i + 1) % L])
    missing = set(range(n_edges)) - set(runs)
    if missing:
        raise AssignmentError(f"polygon edges {sorted(missing)} have no boundary run")
    return runs


def uniform_boundary_positions(mesh: SimplicialMesh, polygon: Polygon,
                               assignment: BoundaryAssignment) -> dict[int, np.ndarray]:
    """Equally spaced images of each boundary run along its polygon edge."""
    feas = assignment_feasibility(mesh, polygon, assignment)
    if not feas:
        raise AssignmentError(f"assignment is not feasible: {feas.reason}")
    out = {}
    for k, run in boundary_runs(mesh, assignment, polygon.n_edges).items():
        a, b = polygon.edge(k)
        m = len(run) - 1
        for j, v in enumerate(run):
            out[v] = a + (j / m) * (b - a)
    return out
