"""Simplicial complexes, integer chains and the boundary operator.

Faces are identified by their vertex indices sorted ascending (the *key*).
An oriented simplex is any ordering of its vertices; its orientation relative
to the key is the parity of the sorting permutation.  Chains store one integer
coefficient per key, always expressed relative to the key's orientation, so
cancellation between faces is exact and independent of how faces were listed.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict, deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import MeshError

FaceKey = tuple[int, ...]


def permutation_parity(seq: Sequence[int]) -> int:
    """Return +1 if sorting ``seq`` takes an even number of swaps, -1 if odd."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
            elif seq[i] == seq[j]:
                raise MeshError(f"simplex {tuple(seq)} repeats vertex {seq[i]}")
    return sign


def canonical(simplex: Sequence[int]) -> tuple[FaceKey, int]:
    """Split an oriented simplex into (sorted key, orientation sign)."""
    simplex = tuple(int(v) for v in simplex)
    return tuple(sorted(simplex)), permutation_parity(simplex)


class Chain:
    """A formal integer combination of oriented faces of one dimension.

    ``terms`` may be keyed by any vertex ordering; coefficients are folded onto
    the sorted key with the orientation sign.  Zero coefficients are dropped.
    Chains are immutable and compare equal when their terms agree.
    """

    __slots__ = ("dim", "_terms")

    def __init__(self, dim: int, terms: Mapping[Sequence[int], int] | None = None):
        if dim < 0:
            raise MeshError(f"chain dimension must be >= 0, got {dim}")
        acc: dict[FaceKey, int] = defaultdict(int)
        for simplex, coeff in (terms or {}).items():
            if len(simplex) != dim + 1:
                raise MeshError(f"face {tuple(simplex)} does not have dimension {dim}")
            if int(coeff) != coeff:
                raise MeshError(f"chain coefficients must be integers, got {coeff!r}")
            key, sign = canonical(simplex)
            acc[key] += sign * int(coeff)
        self.dim = dim
        self._terms = {k: v for k, v in sorted(acc.items()) if v != 0}

    @classmethod
    def unit(cls, simplex: Sequence[int], coeff: int = 1) -> Chain:
        return cls(len(simplex) - 1, {tuple(simplex): coeff})

    @classmethod
    def _from_normalized(cls, dim: int, terms: dict[FaceKey, int]) -> Chain:
        c = cls.__new__(cls)
        c.dim = dim
        c._terms = {k: v for k, v in sorted(terms.items()) if v != 0}
        return c

    @property
    def terms(self) -> Mapping[FaceKey, int]:
        return dict(self._terms)

    @property
    def support(self) -> tuple[FaceKey, ...]:
        """Keys with non-zero coefficient (the index set I(c))."""
        return tuple(self._terms)

    def coefficient(self, simplex: Sequence[int]) -> int:
        """Coefficient of ``simplex`` in the orientation the caller wrote it."""
        key, sign = canonical(simplex)
        return sign * self._terms.get(key, 0)

    def items(self) -> Iterator[tuple[FaceKey, int]]:
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def _check(self, other: Chain) -> None:
        if not isinstance(other, Chain):
            raise TypeError(f"cannot combine Chain with {type(other).__name__}")
        if other.dim != self.dim:
            raise MeshError(f"cannot add a {self.dim}-chain and a {other.dim}-chain")

    def __add__(self, other: Chain) -> Chain:
        self._check(other)
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc.get(k, 0) + v
        return Chain._from_normalized(self.dim, acc)

    def __neg__(self) -> Chain:
        return Chain._from_normalized(self.dim, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other: Chain) -> Chain:
        return self + (-other)

    def __mul__(self, scalar: int) -> Chain:
        if int(scalar) != scalar:
            raise MeshError("chains only admit integer scalars")
        return Chain._from_normalized(self.dim, {k: int(scalar) * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        if not self._terms and not other._terms:
            return True
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.dim, tuple(self._terms.items())))

    def __repr__(self) -> str:
        body = " + ".join(f"{v}*{k}" for k, v in self._terms.items()) or "0"
        return f"Chain(dim={self.dim}: {body})"


def chain_sum(chains: Iterable[Chain], dim: int) -> Chain:
    acc: dict[FaceKey, int] = defaultdict(int)
    for c in chains:
        if c.dim != dim and c:
            raise MeshError(f"cannot add a {c.dim}-chain into a {dim}-chain sum")
        for k, v in c.items():
            acc[k] += v
    return Chain._from_normalized(dim, acc)


def boundary_operator(c: Chain, mesh: SimplicialMesh | None = None) -> Chain:
    """Apply the boundary operator with the standard alternating face signs.

    For a key (s0, ..., sl) the boundary is sum_i (-1)^i (s0..^si..sl); removing
    one entry from a sorted tuple keeps it sorted, so no re-canonicalisation
    is needed.  When ``mesh`` is given every face of ``c`` must belong to it.
    """
    if c.dim < 1:
        raise MeshError("the boundary operator needs a chain of dimension >= 1")
    if mesh is not None:
        known = mesh.face_set(c.dim)
        for key in c.support:
            if key not in known:
                raise MeshError(f"face {key} is not a {c.dim}-face of the mesh")
    acc: dict[FaceKey, int] = defaultdict(int)
    for key, coeff in c.items():
        for i in range(len(key)):
            acc[key[:i] + key[i + 1:]] += (-1) ** i * coeff
    return Chain._from_normalized(c.dim - 1, acc)


def is_cycle(c: Chain) -> bool:
    """True iff the chain has empty boundary.

    0-chains use the augmented convention: they are cycles when their
    coefficients sum to zero (e.g. the two signed endpoints of a path).
    """
    if c.dim == 0:
        return sum(v for _, v in c.items()) == 0
    return boundary_operator(c).is_zero()


def boundary_cycle(mesh: SimplicialMesh) -> Chain:
    """The (d-1)-cycle of the mesh boundary, each face with its induced orientation."""
    return chain_sum(
        (boundary_operator(Chain.unit(face)) for face in mesh.top_faces), mesh.dim - 1
    )


@dataclass(frozen=True)
class BoundaryComplex:
    """Boundary faces of a mesh.

    ``facets`` lists each boundary (d-1)-face as (key, sign) where sign is its
    coefficient in the boundary cycle (the induced orientation relative to the
    key).  ``faces_by_dim[l]`` holds the keys of all boundary l-faces.  For
    triangle meshes ``loops`` holds each boundary component as a vertex cycle
    in induced (counterclockwise for planar meshes) order.
    """

    facets: tuple[tuple[FaceKey, int], ...]
    faces_by_dim: Mapping[int, tuple[FaceKey, ...]]
    loops: tuple[tuple[int, ...], ...]

    def oriented_edges(self) -> list[tuple[int, int]]:
        """Boundary edges as (tail, head) in induced orientation (triangle meshes)."""
        out = []
        for key, sign in self.facets:
            if len(key) != 2:
                raise MeshError("oriented_edges is only defined for triangle meshes")
            out.append(key if sign > 0 else (key[1], key[0]))
        return out


def orient_consistently(top_faces: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Flip faces so neighbours induce opposite orientations on shared facets.

    Flood fills the dual graph from the lowest-index face of every component.
    Returns the re-oriented faces and the indices that were flipped; raises
    :class:`MeshError` if the complex is not orientable or not manifold.
    """
    faces = np.array(top_faces, dtype=np.int64, copy=True)
    incident = _facet_incidence(faces)
    for key, inc in incident.items():
        if len(inc) > 2:
            raise MeshError(f"non-manifold: facet {key} is shared by {len(inc)} faces "
                            f"{[f for f, _ in inc]}")
    signs = {}
    for key, inc in incident.items():
        for f, s in inc:
            signs[(f, key)] = s
    flip = np.zeros(len(faces), dtype=bool)
    seen = np.zeros(len(faces), dtype=bool)
    neighbours: dict[int, list[tuple[int, FaceKey]]] = defaultdict(list)
    for key, inc in incident.items():
        if len(inc) == 2:
            (f0, _), (f1, _) = inc
            neighbours[f0].append((f1, key))
            neighbours[f1].append((f0, key))
    for start in range(len(faces)):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        while queue:
            f = queue.popleft()
            for g, key in neighbours[f]:
                s_f = signs[(f, key)] * (-1 if flip[f] else 1)
                s_g = signs[(g, key)]
                want_flip = s_g == s_f
                if seen[g]:
                    if bool(flip[g]) != want_flip:
                        raise MeshError(f"mesh is not orientable (conflict across facet {key})")
                    continue
                seen[g] = True
                flip[g] = want_flip
                queue.append(g)
    flipped = [int(i) for i in np.nonzero(flip)[0]]
    for i in flipped:
        faces[i, [0, 1]] = faces[i, [1, 0]]
    return faces, flipped


def _facet_incidence(faces: np.ndarray) -> dict[FaceKey, list[tuple[int, int]]]:
    incident: dict[FaceKey, list[tuple[int, int]]] = defaultdict(list)
    for j, face in enumerate(faces):
        key, sign = canonical(face)
        for i in range(len(key)):
            incident[key[:i] + key[i + 1:]].append((j, sign * (-1) ** i))
    return dict(incident)


class SimplicialMesh:
    """A compact, connected, consistently oriented manifold mesh with boundary.

    Parameters
    ----------
    vertices : array_like, shape (V, n)
        Vertex positions in R^n.
    top_faces : array_like of int, shape (F, d + 1)
        Oriented top-dimensional faces.  For full-dimensional meshes (n == d)
        every face must have positive signed volume (counterclockwise
        triangles in the plane).

    All invariants are validated on construction and violations raise
    :class:`MeshError`.  Instances are treated as immutable.
    """

    def __init__(self, vertices, top_faces, *, dim: int | None = None):
        verts = np.array(vertices, dtype=float)
        if verts.ndim != 2:
            raise MeshError("vertices must be a (V, n) array")
        faces = np.array(top_faces, dtype=np.int64)
        if faces.ndim != 2 or faces.shape[0] == 0:
            raise MeshError("top_faces must be a non-empty (F, d+1) integer array")
        d = faces.shape[1] - 1 if dim is None else dim
        if faces.shape[1] != d + 1 or d < 1:
            raise MeshError(f"top faces must have d+1 = {d + 1} vertices (d >= 1)")
        if verts.shape[1] < d:
            raise MeshError(f"ambient dimension {verts.shape[1]} is below mesh dimension {d}")
        verts.setflags(write=False)
        faces.setflags(write=False)
        self.vertices = verts
        self.top_faces = faces
        self.dim = d
        self._validate()

    # ------------------------------------------------------------------ sizes
    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.top_faces.shape[0]

    def __repr__(self) -> str:
        return (f"SimplicialMesh(dim={self.dim}, ambient_dim={self.ambient_dim}, "
                f"V={self.n_vertices}, F={self.n_faces})")

    # -------------------------------------------------------------- structure
    @cached_property
    def facet_incidence(self) -> dict[FaceKey, list[tuple[int, int]]]:
        """(d-1)-face key -> [(top face index, induced sign), ...]."""
        return _facet_incidence(self.top_faces)

    @cached_property
    def _faces_by_dim(self) -> dict[int, tuple[FaceKey, ...]]:
        out: dict[int, set[FaceKey]] = {l: set() for l in range(self.dim + 1)}
        for face in self.top_faces:
            key = tuple(sorted(int(v) for v in face))
            for l in range(self.dim + 1):
                out[l].update(itertools.combinations(key, l + 1))
        return {l: tuple(sorted(s)) for l, s in out.items()}

    def faces(self, ell: int) -> tuple[FaceKey, ...]:
        """Sorted keys of all ell-faces."""
        if not 0 <= ell <= self.dim:
            raise MeshError(f"no {ell}-faces in a {self.dim}-dimensional mesh")
        return self._faces_by_dim[ell]

    @cached_property
    def _face_sets(self) -> dict[int, frozenset[FaceKey]]:
        return {l: frozenset(keys) for l, keys in self._faces_by_dim.items()}

    def face_set(self, ell: int) -> frozenset[FaceKey]:
        if not 0 <= ell <= self.dim:
            raise MeshError(f"no {ell}-faces in a {self.dim}-dimensional mesh")
        return self._face_sets[ell]

    @cached_property
    def edges(self) -> np.ndarray:
        return np.array(self.faces(1), dtype=np.int64).reshape(-1, 2)

    @cached_property
    def boundary(self) -> BoundaryComplex:
        facets = tuple(sorted((k, inc[0][1]) for k, inc in self.facet_incidence.items()
                              if len(inc) == 1))
        by_dim: dict[int, set[FaceKey]] = {l: set() for l in range(self.dim)}
        for key, _ in facets:
            for l in range(self.dim):
                by_dim[l].update(itertools.combinations(key, l + 1))
        loops: tuple[tuple[int, ...], ...] = ()
        if self.dim == 2:
            nxt = {}
            for key, sign in facets:
                a, b = key if sign > 0 else (key[1], key[0])
                nxt[a] = b
            remaining = set(nxt)
            found = []
            while remaining:
                start = min(remaining)
                loop = [start]
                remaining.discard(start)
                v = nxt[start]
                while v != start:
                    loop.append(v)
                    remaining.discard(v)
                    v = nxt[v]
                found.append(tuple(loop))
            loops = tuple(found)
        return BoundaryComplex(
            facets=facets,
            faces_by_dim={l: tuple(sorted(s)) for l, s in by_dim.items()},
            loops=loops,
        )

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.array(self.boundary.faces_by_dim[0], dtype=np.int64).reshape(-1)

    @cached_property
    def is_boundary_vertex(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = True
        return mask

    # --------------------------------------------------------------- geometry
    @cached_property
    def face_volumes(self) -> np.ndarray:
        """Volume (area for triangles) of each top face in the source."""
        edges = self.vertices[self.top_faces[:, 1:]] - self.vertices[self.top_faces[:, :1]]
        gram = np.einsum("fik,fjk->fij", edges, edges)
        return np.sqrt(np.clip(np.linalg.det(gram), 0.0, None)) / math.factorial(self.dim)

    @cached_property
    def signed_volumes(self) -> np.ndarray | None:
        """Signed volumes for full-dimensional meshes, ``None`` otherwise."""
        if self.ambient_dim != self.dim:
            return None
        edges = self.vertices[self.top_faces[:, 1:]] - self.vertices[self.top_faces[:, :1]]
        return np.linalg.det(np.transpose(edges, (0, 2, 1))) / math.factorial(self.dim)

    @property
    def total_volume(self) -> float:
        return float(self.face_volumes.sum())

    @property
    def diameter(self) -> float:
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    # ------------------------------------------------------------- validation
    def _validate(self) -> None:
        V, F = self.n_vertices, self.n_faces
        faces = self.top_faces
        if faces.min() < 0 or faces.max() >= V:
            bad = np.nonzero((faces < 0).any(axis=1) | (faces >= V).any(axis=1))[0]
            raise MeshError(f"faces {bad.tolist()} reference vertices outside 0..{V - 1}")
        for j, face in enumerate(faces):
            if len(set(face.tolist())) != len(face):
                raise MeshError(f"face {j} repeats a vertex: {face.tolist()}")
        keys = [tuple(sorted(f)) for f in faces.tolist()]
        if len(set(keys)) != F:
            seen: dict[FaceKey, int] = {}
            for j, k in enumerate(keys):
                if k in seen:
                    raise MeshError(f"faces {seen[k]} and {j} are duplicates")
                seen[k] = j
        used = np.zeros(V, dtype=bool)
        used[faces.ravel()] = True
        if not used.all():
            raise MeshError(f"unreferenced vertices: {np.nonzero(~used)[0].tolist()}")

        n_boundary = 0
        adjacency: dict[int, list[int]] = defaultdict(list)
        for key, inc in self.facet_incidence.items():
            if len(inc) > 2:
                raise MeshError(f"non-manifold: facet {key} is shared by faces "
                                f"{[f for f, _ in inc]}")
            if len(inc) == 1:
                n_boundary += 1
                continue
            (f0, s0), (f1, s1) = inc
            if s0 == s1:
                raise MeshError(f"inconsistent orientation: faces {f0} and {f1} induce the "
                                f"same orientation on shared facet {key}")
            adjacency[f0].append(f1)
            adjacency[f1].append(f0)
        if n_boundary == 0:
            raise MeshError("mesh has no boundary")

        seen_faces = {0}
        queue = deque([0])
        while queue:
            for g in adjacency[queue.popleft()]:
                if g not in seen_faces:
                    seen_faces.add(g)
                    queue.append(g)
        if len(seen_faces) != F:
            raise MeshError(f"mesh is not connected ({F - len(seen_faces)} faces unreachable "
                            "from face 0)")

        if self.dim == 2:
            self._validate_vertex_fans()

        vols = self.face_volumes
        scale = max(self.diameter, np.finfo(float).tiny) ** self.dim
        degenerate = np.nonzero(vols <= 1e-14 * scale)[0]
        if degenerate.size:
            raise MeshError(f"degenerate source faces: {degenerate.tolist()}")
        signed = self.signed_volumes
        if signed is not None:
            negative = np.nonzero(signed < 0)[0]
            if negative.size:
                raise MeshError(f"faces {negative.tolist()} are negatively oriented; "
                                "full-dimensional meshes must be positively oriented")

    def _validate_vertex_fans(self) -> None:
        # Every vertex star must be one edge-connected fan; catches bow-tie vertices.
        star: dict[int, list[int]] = defaultdict(list)
        for j, face in enumerate(self.top_faces.tolist()):
            for v in face:
                star[v].append(j)
        edge_faces: dict[FaceKey, list[int]] = {k: [f for f, _ in inc]
                                                 for k, inc in self.facet_incidence.items()}
        for v, fs in star.items():
            members = set(fs)
            start = fs[0]
            seen = {start}
            queue = deque([start])
            while queue:
                f = queue.popleft()
                for w in self.top_faces[f].tolist():
                    if w == v:
                        continue
                    for g in edge_faces[tuple(sorted((v, w)))]:
                        if g in members and g not in seen:
                            seen.add(g)
                            queue.append(g)
            if len(seen) != len(members):
                raise MeshError(f"non-manifold vertex {v}: its faces form several fans")
