"""Degree of a simplicial map restricted to a cycle, and pre-image counting.

The degree deg(Phi_q, c) is computed as a signed count: shoot a ray from q in
a generic direction p and add, for every face of the cycle whose image the
ray crosses, the face coefficient times the orientation sign with which the
face wraps around q.  A direction is generic when the ray stays clear of the
images of all codimension-one faces of the cycle; otherwise a fresh random
direction is drawn.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .errors import DegreeUndefinedError, MeshError, ParameterError
from .maps import SimplicialMap
from .mesh import Chain, SimplicialMesh, boundary_cycle, boundary_operator, is_cycle

DEFAULT_EPS_GEO = 1e-9
MAX_RETRIES = 64


def _as_point(q, d: int) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape != (d,):
        raise ParameterError(f"query point must have {d} coordinates")
    return q


def _bbox_diameter(points: np.ndarray) -> float:
    if len(points) == 0:
        return 0.0
    return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))


def segment_distances(q: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from q to each segment [a_i, b_i] (any dimension)."""
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.einsum("ij,ij->i", q - a, ab) / np.where(denom > 0, denom, 1.0)
    t = np.clip(np.where(denom > 0, t, 0.0), 0.0, 1.0)
    return np.linalg.norm(a + t[:, None] * ab - q, axis=1)


def simplex_distance(q: np.ndarray, pts: np.ndarray) -> float:
    """Euclidean distance from q to the convex hull of the rows of ``pts``."""
    k = len(pts)
    if k == 1:
        return float(np.linalg.norm(pts[0] - q))
    if k == 2:
        return float(segment_distances(q, pts[:1], pts[1:])[0])
    scale = max(1.0, float(np.abs(pts).max()), float(np.abs(q).max()))
    weight = 1e3 * scale
    M = np.vstack([pts.T, weight * np.ones(k)])
    rhs = np.concatenate([q, [weight]])
    lam, _ = nnls(M, rhs)
    lam = lam / lam.sum() if lam.sum() > 0 else np.full(k, 1.0 / k)
    return float(np.linalg.norm(lam @ pts - q))


def distances_to_faces(q: np.ndarray, face_points: np.ndarray) -> np.ndarray:
    """Distance from q to each simplex image; ``face_points`` has shape (m, k, d)."""
    if len(face_points) == 0:
        return np.zeros(0)
    k = face_points.shape[1]
    if k == 1:
        return np.linalg.norm(face_points[:, 0] - q, axis=1)
    if k == 2:
        return segment_distances(q, face_points[:, 0], face_points[:, 1])
    return np.array([simplex_distance(q, p) for p in face_points])


@dataclass(frozen=True)
class _CycleData:
    keys: np.ndarray  # (m, d) vertex indices, sorted key order
    coeffs: np.ndarray  # (m,)


def _cycle_data(phi: SimplicialMap, cycle: Chain) -> _CycleData:
    d = phi.dim
    if cycle.dim != d - 1:
        raise MeshError(f"degree needs a {d - 1}-cycle, got a {cycle.dim}-chain")
    known = phi.mesh.face_set(d - 1)
    for key in cycle.support:
        if key not in known:
            raise MeshError(f"face {key} is not a {d - 1}-face of the mesh")
    if not is_cycle(cycle):
        raise MeshError("chain is not a cycle; its degree is not defined")
    keys = np.array(cycle.support, dtype=np.int64).reshape(-1, d)
    coeffs = np.array([v for _, v in cycle.items()], dtype=np.int64)
    return _CycleData(keys, coeffs)


def _count_2d(w0: np.ndarray, w1: np.ndarray, a: np.ndarray, r: np.ndarray,
              verts: np.ndarray, eps: float) -> int | None:
    """Signed crossings of the ray q + lambda r with segments (w0_i, w1_i).

    Returns ``None`` when the ray passes within ``eps`` of a cycle vertex.
    """
    side_v = verts[:, 0] * r[1] - verts[:, 1] * r[0]
    ahead_v = verts @ r
    if np.any((np.abs(side_v) <= eps) & (ahead_v > -eps)):
        return None
    s0 = w0[:, 0] * r[1] - w0[:, 1] * r[0]
    s1 = w1[:, 0] * r[1] - w1[:, 1] * r[0]
    straddle = (s0 > 0) != (s1 > 0)
    if not straddle.any():
        return 0
    s0, s1, w0s, w1s, a = s0[straddle], s1[straddle], w0[straddle], w1[straddle], a[straddle]
    t = s0 / (s0 - s1)
    hit_point = w0s + t[:, None] * (w1s - w0s)
    ahead = hit_point @ r > 0
    # s1 < s0 means the segment passes the ray from its right to its left side
    # as seen from q, i.e. counterclockwise around q.
    sign = np.where(s1 < s0, 1, -1)
    return int(np.sum(a[ahead] * sign[ahead]))


def _count_general(W: np.ndarray, a: np.ndarray, r: np.ndarray, eps: float) -> int | None:
    """Signed count of cone hits for general d; W has shape (m, d, d) with rows w_i.

    ``eps`` is an angular margin: the ray must stay that far (in units of the
    unit direction) from the boundary of every face cone.
    """
    total = 0
    for Wi, ai in zip(W, a):
        cols = Wi.T  # columns are the relative vertex images
        norms = np.linalg.norm(cols, axis=0)
        det = np.linalg.det(cols)
        if abs(det) <= 1e-12 * np.prod(norms):
            # Flat image through q: its radial image lies in that of its
            # boundary, so only a ray close to its span is non-generic.
            u, s, _ = np.linalg.svd(cols)
            rank = int(np.sum(s > 1e-12 * max(s[0], 1e-300)))
            resid = r - u[:, :rank] @ (u[:, :rank].T @ r)
            if np.linalg.norm(resid) <= 1e-9:
                return None
            continue
        alpha = np.linalg.solve(cols, r)
        scaled = alpha * norms
        lo = scaled.min()
        if lo > eps:
            total += int(ai) * (1 if det > 0 else -1)
        elif np.all(scaled > -eps):
            return None
    return total


def cycle_degree(phi: SimplicialMap, cycle: Chain, q, *, seed: int | None = 0,
                 max_retries: int = MAX_RETRIES, eps_geo: float = DEFAULT_EPS_GEO) -> int:
    """Integer degree of ``phi`` restricted to ``cycle`` around the point ``q``.

    Raises :class:`DegreeUndefinedError` if ``q`` lies within
    ``eps_geo * diameter`` of the image of the cycle.  The random ray
    directions come from ``numpy.random.default_rng(seed)``; the result does
    not depend on the seed.
    """
    d = phi.dim
    q = _as_point(q, d)
    data = _cycle_data(phi, cycle)
    if len(data.keys) == 0:
        return 0
    pts = phi.images[data.keys]  # (m, d, d)
    eps = eps_geo * max(_bbox_diameter(np.vstack([pts.reshape(-1, d), q[None]])),
                        np.finfo(float).tiny)
    if np.min(distances_to_faces(q, pts)) <= eps:
        raise DegreeUndefinedError(f"point {q.tolist()} lies on the image of the cycle")
    W = pts - q
    rng = np.random.default_rng(seed)
    if d == 2:
        verts = phi.images[np.unique(data.keys)] - q
    for _ in range(max_retries):
        r = rng.standard_normal(d)
        r /= np.linalg.norm(r)
        if d == 1:
            hits = W[:, 0, 0] * r[0] > 0
            return int(np.sum(data.coeffs[hits] * np.sign(W[hits, 0, 0] * 1.0).astype(int)))
        if d == 2:
            res = _count_2d(W[:, 0], W[:, 1], data.coeffs, r, verts, eps)
        else:
            res = _count_general(W, data.coeffs, r, eps_geo)
        if res is not None:
            return res
    raise DegreeUndefinedError(f"no generic ray direction found after {max_retries} tries")


def degree_additivity_check(phi: SimplicialMap, c1: Chain, c2: Chain, q, *,
                            seed: int | None = 0) -> bool:
    """True iff deg(c1 + c2) == deg(c1) + deg(c2) at ``q``."""
    return (cycle_degree(phi, c1 + c2, q, seed=seed)
            == cycle_degree(phi, c1, q, seed=seed) + cycle_degree(phi, c2, q, seed=seed))


def face_boundary_degree(phi: SimplicialMap, face_id: int, q, *, seed: int | None = 0) -> int:
    """Degree of the boundary of one top face around ``q``.

    For a positively oriented, non-degenerate face this is 1 when q is inside
    the image face and 0 when it is outside (a reversed face gives -1 inside).
    """
    face = phi.mesh.top_faces[face_id]
    return cycle_degree(phi, boundary_operator(Chain.unit(face)), q, seed=seed)


@dataclass(frozen=True)
class PreimageCount:
    q: np.ndarray
    count: int
    witnesses: tuple[tuple[int, np.ndarray], ...]
    points: np.ndarray
    degenerate_hits: tuple[int, ...] = field(default=())


def _face_inverses(phi: SimplicialMap):
    cache = phi.__dict__.get("_face_inverses")
    if cache is None:
        d = phi.dim
        P = phi.images[phi.mesh.top_faces]  # (F, d+1, d)
        H = np.concatenate([np.transpose(P, (0, 2, 1)), np.ones((len(P), 1, d + 1))], axis=1)
        nd = np.abs(np.linalg.det(H))
        scale = np.max(np.linalg.norm(P - P[:, :1], axis=2), axis=1) ** d
        ok = nd > 1e-13 * np.maximum(scale, np.finfo(float).tiny)
        inv = np.zeros_like(H)
        inv[ok] = np.linalg.inv(H[ok])
        cache = (P, inv, ok)
        phi.__dict__["_face_inverses"] = cache
    return cache


def preimage_count(phi: SimplicialMap, q, *, tol: float = 1e-9) -> PreimageCount:
    """Count distinct points x of the mesh with phi(x) = q.

    Each face is solved in barycentric coordinates; solutions on shared lower
    dimensional faces are merged by their carrier face (the vertices with
    non-zero barycentric weight), so a point on an interior edge counts once.
    Faces with degenerate images that contain q are reported separately in
    ``degenerate_hits`` and are not counted.
    """
    d = phi.dim
    q = _as_point(q, d)
    P, inv, ok = _face_inverses(phi)
    faces = phi.mesh.top_faces
    lam = np.einsum("fij,j->fi", inv, np.append(q, 1.0))
    inside = ok & np.all(lam >= -tol, axis=1)

    groups: dict[tuple[int, ...], list[np.ndarray]] = {}
    witnesses = []
    points = []
    for f in np.nonzero(inside)[0]:
        bary = lam[f].copy()
        bary[np.abs(bary) <= tol] = 0.0
        bary = np.clip(bary, 0.0, None)
        bary /= bary.sum()
        verts = faces[f]
        order = np.argsort(verts)
        carrier = tuple(int(verts[i]) for i in order if bary[i] > 0)
        weights = np.array([bary[i] for i in order if bary[i] > 0])
        bucket = groups.setdefault(carrier, [])
        if any(np.max(np.abs(w - weights)) <= 1e-7 for w in bucket):
            continue
        bucket.append(weights)
        witnesses.append((int(f), bary))
        points.append(bary @ phi.mesh.vertices[verts])

    degenerate_hits: list[int] = []
    bad = np.nonzero(~ok)[0]
    if bad.size:
        eps = DEFAULT_EPS_GEO * max(_bbox_diameter(phi.images), np.finfo(float).tiny)
        dist = distances_to_faces(q, P[bad])
        degenerate_hits = [int(f) for f, dd in zip(bad, dist) if dd <= eps]
    pts = np.array(points).reshape(-1, phi.mesh.ambient_dim)
    return PreimageCount(q=q, count=len(witnesses), witnesses=tuple(witnesses), points=pts,
                         degenerate_hits=tuple(degenerate_hits))


@dataclass(frozen=True)
class Theorem4Check:
    """Comparison between the number of pre-images and the boundary degree."""

    q: np.ndarray
    count: int
    degree: int
    inequality_holds: bool
    equality_expected: bool
    equality_holds: bool

    @property
    def consistent(self) -> bool:
        return self.inequality_holds and (self.equality_holds or not self.equality_expected)


def _boundary_cycle_cached(mesh: SimplicialMesh) -> Chain:
    c = mesh.__dict__.get("_boundary_cycle")
    if c is None:
        c = boundary_cycle(mesh)
        mesh.__dict__["_boundary_cycle"] = c
    return c


def facet_images(phi: SimplicialMap, keys) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, phi.dim)
    return phi.images[keys]


def distance_to_skeleton(phi: SimplicialMap, q, *, boundary_only: bool = False) -> float:
    """Distance from q to the image of all (or only boundary) (d-1)-faces."""
    q = _as_point(q, phi.dim)
    if boundary_only:
        keys = [k for k, _ in phi.mesh.boundary.facets]
    else:
        keys = phi.mesh.faces(phi.dim - 1)
    return float(np.min(distances_to_faces(q, facet_images(phi, keys))))


def theorem4_check(phi: SimplicialMap, q, *, seed: int | None = 0,
                   eps_geo: float = DEFAULT_EPS_GEO) -> Theorem4Check:
    """Check #preimages(q) <= deg(Phi_q, boundary), with equality off the (d-1)-skeleton image.

    Raises :class:`DegreeUndefinedError` when q is within ``eps_geo * diameter``
    of the image of the mesh boundary.
    """
    q = _as_point(q, phi.dim)
    eps = eps_geo * max(_bbox_diameter(phi.images), np.finfo(float).tiny)
    if distance_to_skeleton(phi, q, boundary_only=True) <= eps:
        raise DegreeUndefinedError(f"point {q.tolist()} is too close to the boundary image")
    degree = cycle_degree(phi, _boundary_cycle_cached(phi.mesh), q, seed=seed, eps_geo=eps_geo)
    count = preimage_count(phi, q).count
    off_y = distance_to_skeleton(phi, q) > eps
    return Theorem4Check(q=q, count=count, degree=degree, inequality_holds=count <= degree,
                         equality_expected=off_y, equality_holds=count == degree)
