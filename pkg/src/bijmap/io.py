"""Mesh files (OFF, OBJ) and the line-oriented problem file format.

Problem file grammar, one directive per line, ``#`` starts a comment::

    mesh      <path>                  # OFF or OBJ, relative to this file
    polygon   x0 y0 x1 y1 ...         # counterclockwise target vertices
    corners   v0 v1 ...               # boundary vertex sent to each polygon vertex
    assign    a b k                   # boundary edge (a, b) -> polygon edge k (repeatable)
    K         15
    mode      free | fixed-uniform | feasibility
    seed      0
    tolerance 1e-8                    # certificate tolerance, relative to polygon diameter
    max_outer 10

Exactly one of ``corners`` or ``assign`` must be used.  Indices are 0-based.
Polygon edge indices refer to the polygon as written; collinear runs are
merged afterwards and the indices remapped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BijmapError, MeshError, ProblemFileError
from .mesh import SimplicialMesh, orient_consistently
from .optimize import BDParams
from .polygon import BoundaryAssignment, Polygon, corner_table

log = logging.getLogger(__name__)

MODES = ("free", "fixed-uniform", "feasibility")


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_off(text: str):
    toks = [(n, t) for n, t in _tokens(text)]
    if not toks:
        raise MeshError("empty OFF file")
    lineno, head = toks[0]
    if not head[0].upper().endswith("OFF"):
        raise MeshError("OFF file must start with 'OFF'")
    rest = head[1:]
    pos = 1
    if not rest:
        lineno, rest = toks[1]
        pos = 2
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (IndexError, ValueError) as exc:
        raise MeshError(f"line {lineno}: bad OFF counts") from exc
    if len(toks) < pos + nv + nf:
        raise MeshError(f"OFF file is truncated: expected {nv} vertices and {nf} faces")
    verts, faces = [], []
    for k in range(nv):
        lineno, t = toks[pos + k]
        try:
            verts.append([float(x) for x in t[:3]])
        except ValueError as exc:
            raise MeshError(f"line {lineno}: bad vertex {k}") from exc
    pos += nv
    for k in range(nf):
        lineno, t = toks[pos + k]
        n = int(t[0])
        if n != 3:
            raise MeshError(f"face {k} has {n} vertices; only triangles are supported")
        faces.append([int(x) for x in t[1:4]])
    return verts, faces


def _parse_obj(text: str):
    verts, faces = [], []
    for lineno, t in _tokens(text):
        if t[0] == "v":
            verts.append([float(x) for x in t[1:4]])
        elif t[0] == "f":
            idx = []
            for tok in t[1:]:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            if len(idx) != 3:
                raise MeshError(f"face {len(faces)} (line {lineno}) has {len(idx)} vertices; "
                                "only triangles are supported")
            faces.append(idx)
    return verts, faces


def read_mesh(path) -> tuple[SimplicialMesh, list[str]]:
    """Load an OFF or OBJ triangle mesh; returns the mesh and notes on any repairs.

    Planar meshes (2-D coordinates or all z equal to 0) become 2-D meshes and
    are oriented counterclockwise.  Mixed face winding is repaired by flood
    fill; non-orientable or non-manifold input raises MeshError.
    """
    path = Path(path)
    text = path.read_text()
    suffix = path.suffix.lower()
    if suffix == ".off":
        verts, faces = _parse_off(text)
    elif suffix == ".obj":
        verts, faces = _parse_obj(text)
    else:
        raise MeshError(f"unsupported mesh format {suffix!r}; use .off or .obj")
    if not faces:
        raise MeshError("mesh has no faces")
    widths = {len(v) for v in verts}
    if len(widths) != 1 or widths.pop() not in (2, 3):
        raise MeshError("vertices must all have 2 or 3 coordinates")
    V = np.array(verts, dtype=float)
    F = np.array(faces, dtype=np.int64)
    if F.min() < 0 or F.max() >= len(V):
        bad = np.nonzero((F < 0).any(axis=1) | (F >= len(V)).any(axis=1))[0]
        raise MeshError(f"faces {bad.tolist()} reference missing vertices")
    notes = []
    if V.shape[1] == 3 and np.all(V[:, 2] == 0.0):
        V = V[:, :2]
    F, flipped = orient_consistently(F)
    if flipped:
        notes.append(f"reoriented {len(flipped)} face(s) for consistent winding: {flipped}")
    if V.shape[1] == 2:
        p = V[F]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        signed = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        if signed.sum() < 0:
            F = F[:, [1, 0, 2]]
            notes.append("flipped all faces to counterclockwise winding")
    for note in notes:
        log.info("%s: %s", path, note)
    return SimplicialMesh(V, F), notes


def load_mesh(path) -> SimplicialMesh:
    return read_mesh(path)[0]


def write_obj(path, mesh: SimplicialMesh, images=None) -> None:
    """Write the mesh (or its image under a map) as OBJ with full float precision."""
    pts = mesh.vertices if images is None else np.asarray(images, dtype=float)
    lines = []
    for p in pts:
        xyz = list(p) + [0.0] * (3 - len(p))
        lines.append("v " + " ".join(f"{c:.17g}" for c in xyz))
    for f in mesh.top_faces:
        lines.append("f " + " ".join(str(int(i) + 1) for i in f))
    Path(path).write_text("\n".join(lines) + "\n")


def write_off(path, mesh: SimplicialMesh, images=None) -> None:
    pts = mesh.vertices if images is None else np.asarray(images, dtype=float)
    lines = ["OFF", f"{len(pts)} {mesh.n_faces} 0"]
    for p in pts:
        xyz = list(p) + [0.0] * (3 - len(p))
        lines.append(" ".join(f"{c:.17g}" for c in xyz))
    for f in mesh.top_faces:
        lines.append("3 " + " ".join(str(int(i)) for i in f))
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class ProblemFile:
    """Parsed contents of a problem file, before geometry is validated."""

    path: Path | None = None
    mesh_path: Path | None = None
    polygon: list[tuple[float, float]] = field(default_factory=list)
    corners: list[int] | None = None
    assignment: list[tuple[int, int, int]] = field(default_factory=list)
    K: float = 15.0
    mode: str = "free"
    seed: int = 0
    tolerance: float = 1e-8
    max_outer: int = 10
    lines: dict[str, int] = field(default_factory=dict)


@dataclass
class LoadedProblem:
    mesh: SimplicialMesh
    polygon: Polygon
    assignment: BoundaryAssignment
    params: BDParams
    mode: str
    seed: int
    tolerance: float
    source: ProblemFile | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def eps_con(self) -> float:
        return self.tolerance * self.polygon.diameter


def parse_problem(text: str, path=None) -> ProblemFile:
    pf = ProblemFile(path=Path(path) if path is not None else None)
    where = str(path) if path is not None else None

    def fail(msg, lineno):
        raise ProblemFileError(msg, lineno, where)

    def number(tok, lineno, kind=float):
        try:
            return kind(tok)
        except ValueError:
            fail(f"expected {'an integer' if kind is int else 'a number'}, got {tok!r}", lineno)

    for lineno, (key, *args) in _tokens(text):
        if key in pf.lines and key != "assign":
            fail(f"duplicate '{key}' directive (first on line {pf.lines[key]})", lineno)
        pf.lines.setdefault(key, lineno)
        if key == "mesh":
            if len(args) != 1:
                fail("'mesh' takes exactly one path", lineno)
            base = pf.path.parent if pf.path is not None else Path(".")
            pf.mesh_path = base / args[0]
        elif key == "polygon":
            if len(args) < 6 or len(args) % 2:
                fail("'polygon' needs an even number (at least 6) of coordinates", lineno)
            vals = [number(a, lineno) for a in args]
            pf.polygon = list(zip(vals[0::2], vals[1::2]))
        elif key == "corners":
            pf.corners = [number(a, lineno, int) for a in args]
        elif key == "assign":
            if len(args) != 3:
                fail("'assign' takes a b k", lineno)
            pf.assignment.append(tuple(number(a, lineno, int) for a in args))
        elif key == "K":
            pf.K = number(args[0], lineno) if len(args) == 1 else fail("'K' takes one value", lineno)
        elif key == "mode":
            if len(args) != 1 or args[0] not in MODES:
                fail(f"'mode' must be one of {', '.join(MODES)}", lineno)
            pf.mode = args[0]
        elif key == "seed":
            pf.seed = number(args[0], lineno, int) if len(args) == 1 else fail("'seed' takes one value", lineno)
        elif key == "tolerance":
            pf.tolerance = number(args[0], lineno) if len(args) == 1 else fail("'tolerance' takes one value", lineno)
        elif key == "max_outer":
            pf.max_outer = number(args[0], lineno, int) if len(args) == 1 else fail("'max_outer' takes one value", lineno)
        else:
            fail(f"unknown directive {key!r}", lineno)
    last = max(pf.lines.values(), default=None)
    if pf.mesh_path is None:
        fail("missing 'mesh' directive", last)
    if not pf.polygon:
        fail("missing 'polygon' directive", last)
    if pf.corners is None and not pf.assignment:
        fail("give either 'corners' or 'assign' lines", last)
    if pf.corners is not None and pf.assignment:
        fail("'corners' and 'assign' cannot be combined", pf.lines["corners"])
    if not pf.tolerance > 0:
        fail("'tolerance' must be positive", pf.lines.get("tolerance"))
    return pf


def build_problem(pf: ProblemFile, mesh: SimplicialMesh | None = None) -> LoadedProblem:
    """Turn a parsed problem file into validated geometry, with line-numbered errors."""
    where = str(pf.path) if pf.path is not None else None

    def wrap(key, fn, *a):
        try:
            return fn(*a)
        except (BijmapError, OSError) as exc:
            raise ProblemFileError(str(exc), pf.lines.get(key), where) from exc

    notes = []
    if mesh is None:
        mesh, notes = wrap("mesh", read_mesh, pf.mesh_path)
    polygon, edge_map = wrap("polygon", Polygon.from_points, pf.polygon)
    if len(pf.polygon) != polygon.n_edges:
        notes.append(f"merged collinear polygon edges: {len(pf.polygon)} -> {polygon.n_edges}")
    if pf.corners is not None:
        if len(pf.corners) != len(pf.polygon):
            raise ProblemFileError(f"{len(pf.corners)} corners for a polygon with "
                                   f"{len(pf.polygon)} vertices", pf.lines["corners"], where)
        raw = wrap("corners", corner_table, mesh, pf.corners)
        key = "corners"
    else:
        raw = {}
        for a, b, k in pf.assignment:
            if not 0 <= k < len(pf.polygon):
                raise ProblemFileError(f"polygon edge {k} out of range", pf.lines["assign"], where)
            raw[(a, b)] = k
        key = "assign"
    table = {e: edge_map[k] for e, k in raw.items()}
    assignment = wrap(key, BoundaryAssignment.build, mesh, polygon, table)
    params = wrap("K", lambda: BDParams(K=pf.K, max_outer=pf.max_outer))
    return LoadedProblem(mesh=mesh, polygon=polygon, assignment=assignment, params=params,
                         mode=pf.mode, seed=pf.seed, tolerance=pf.tolerance, source=pf,
                         notes=notes)


def load_problem(path) -> LoadedProblem:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFileError(str(exc), None, str(path)) from exc
    return build_problem(parse_problem(text, path))


def format_problem(*, mesh_path, polygon: Polygon | list, corners=None, assignment=None,
                   K: float = 15.0, mode: str = "free", seed: int = 0,
                   tolerance: float = 1e-8, max_outer: int = 10) -> str:
    """Render a problem file (the inverse of :func:`parse_problem`)."""
    pts = polygon.vertices if isinstance(polygon, Polygon) else np.asarray(polygon, dtype=float)
    out = [f"mesh {mesh_path}",
           "polygon " + " ".join(f"{c:.17g}" for c in np.asarray(pts).ravel())]
    if corners is not None:
        out.append("corners " + " ".join(str(int(c)) for c in corners))
    for (a, b), k in sorted((assignment or {}).items()):
        out.append(f"assign {a} {b} {k}")
    out += [f"K {K:g}", f"mode {mode}", f"seed {seed}", f"tolerance {tolerance:g}",
            f"max_outer {max_outer}"]
    return "\n".join(out) + "\n"


def load_images(path, mesh: SimplicialMesh) -> np.ndarray:
    """Vertex images stored in an OFF/OBJ file with the same connectivity as ``mesh``.

    Unlike :func:`read_mesh` this does no validation of the image geometry,
    so folded or degenerate maps can be read back for certification.
    """
    path = Path(path)
    text = path.read_text()
    suffix = path.suffix.lower()
    if suffix == ".off":
        verts, faces = _parse_off(text)
    elif suffix == ".obj":
        verts, faces = _parse_obj(text)
    else:
        raise MeshError(f"unsupported mesh format {suffix!r}; use .off or .obj")
    V = np.array(verts, dtype=float)
    if V.ndim != 2 or len(V) != mesh.n_vertices:
        raise MeshError(f"{path} has {len(V)} vertices, the source mesh has {mesh.n_vertices}")
    F = np.array(faces, dtype=np.int64)
    if F.shape != mesh.top_faces.shape or not np.array_equal(F, mesh.top_faces):
        raise MeshError(f"{path} does not share the source mesh's faces")
    if V.shape[1] == 3:
        if np.any(V[:, 2] != 0.0):
            raise MeshError(f"{path} is not planar (nonzero z coordinates)")
        V = V[:, :2]
    return V
