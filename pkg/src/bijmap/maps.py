"""Simplicial maps, their per-face affine pieces, and quantities derived from them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MeshError, ParameterError
from .mesh import SimplicialMesh

ORIENTATION_PRESERVING = "orientation_preserving"
ORIENTATION_REVERSING = "orientation_reversing"
MIXED = "mixed"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class FaceFrames:
    """Per-face source coordinate frames.

    ``coords[j]`` holds the d-dimensional coordinates of face j's vertices in
    its frame.  Full-dimensional meshes use the global frame (origin 0, axes
    I); embedded meshes use an orthonormal frame with origin at the first
    vertex and first axis along the first edge, oriented so the face is
    positive.  ``grad[j]`` maps corner images to the linear part:
    ``A_j = U_j @ grad[j]`` with ``U_j`` the (d, d+1) matrix of corner images.
    """

    origins: np.ndarray  # (F, n)
    axes: np.ndarray  # (F, n, d)
    coords: np.ndarray  # (F, d+1, d)
    grad: np.ndarray  # (F, d+1, d)
    offset: np.ndarray  # (F, d+1): delta_j = U_j @ offset[j]


def face_frames(mesh: SimplicialMesh) -> FaceFrames:
    d, n = mesh.dim, mesh.ambient_dim
    pts = mesh.vertices[mesh.top_faces]  # (F, d+1, n)
    F = mesh.n_faces
    if n == d:
        origins = np.zeros((F, n))
        axes = np.broadcast_to(np.eye(n), (F, n, d)).copy()
        coords = pts.copy()
    else:
        origins = pts[:, 0, :]
        edges = np.transpose(pts[:, 1:, :] - origins[:, None, :], (0, 2, 1))  # (F, n, d)
        q, r = np.linalg.qr(edges)
        signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
        signs[signs == 0] = 1.0
        axes = q * signs[:, None, :]
        local = np.transpose(r * signs[:, :, None], (0, 2, 1))  # (F, d, d) rows = vertices 1..d
        coords = np.concatenate([np.zeros((F, 1, d)), local], axis=1)
    homog = np.concatenate([np.transpose(coords, (0, 2, 1)), np.ones((F, 1, d + 1))], axis=1)
    try:
        inv = np.linalg.inv(homog)
    except np.linalg.LinAlgError as exc:
        raise MeshError("degenerate source face: interpolation system is singular") from exc
    return FaceFrames(origins=origins, axes=axes, coords=coords,
                      grad=inv[:, :, :d], offset=inv[:, :, d])


@dataclass(frozen=True)
class AffineFaceMap:
    face_id: int
    linear_part: np.ndarray
    translation: np.ndarray
    frame_origin: np.ndarray
    frame_axes: np.ndarray
    frame_coords: np.ndarray

    def __call__(self, x_local: np.ndarray) -> np.ndarray:
        return self.linear_part @ np.asarray(x_local) + self.translation


class SimplicialMap:
    """A map of ``mesh`` into R^d given by one image point per vertex."""

    def __init__(self, mesh: SimplicialMesh, images):
        images = np.array(images, dtype=float)
        if images.shape != (mesh.n_vertices, mesh.dim):
            raise ParameterError(f"images must have shape ({mesh.n_vertices}, {mesh.dim}), "
                                 f"got {images.shape}")
        if not np.all(np.isfinite(images)):
            raise ParameterError("images contain non-finite values")
        images.setflags(write=False)
        self.mesh = mesh
        self.images = images

    @property
    def dim(self) -> int:
        return self.mesh.dim

    def __repr__(self) -> str:
        return f"SimplicialMap({self.mesh!r})"

    @cached_property
    def frames(self) -> FaceFrames:
        return _cached_frames(self.mesh)

    @cached_property
    def jacobians(self) -> np.ndarray:
        """Linear parts A_j, shape (F, d, d)."""
        U = np.transpose(self.images[self.mesh.top_faces], (0, 2, 1))  # (F, d, d+1)
        return U @ self.frames.grad

    @cached_property
    def translations(self) -> np.ndarray:
        U = np.transpose(self.images[self.mesh.top_faces], (0, 2, 1))
        return np.einsum("fij,fj->fi", U, self.frames.offset)

    @cached_property
    def determinants(self) -> np.ndarray:
        return np.linalg.det(self.jacobians)

    def face_images(self, face_id: int) -> np.ndarray:
        return self.images[self.mesh.top_faces[face_id]]

    def with_images(self, images) -> SimplicialMap:
        return SimplicialMap(self.mesh, images)


def _cached_frames(mesh: SimplicialMesh) -> FaceFrames:
    # Frames depend only on the mesh; keep one copy per mesh instance.
    frames = mesh.__dict__.get("_frames")
    if frames is None:
        frames = face_frames(mesh)
        mesh.__dict__["_frames"] = frames
    return frames


def face_affine_map(phi: SimplicialMap, face_id: int) -> AffineFaceMap:
    """The affine piece of ``phi`` on one face, expressed in that face's frame."""
    if not 0 <= face_id < phi.mesh.n_faces:
        raise MeshError(f"face {face_id} out of range")
    fr = phi.frames
    return AffineFaceMap(
        face_id=face_id,
        linear_part=phi.jacobians[face_id].copy(),
        translation=phi.translations[face_id].copy(),
        frame_origin=fr.origins[face_id].copy(),
        frame_axes=fr.axes[face_id].copy(),
        frame_coords=fr.coords[face_id].copy(),
    )


@dataclass(frozen=True)
class BCDecomposition:
    """Split A = B + C into a similarity part B and an anti-similarity part C."""

    B: np.ndarray
    C: np.ndarray


def bc_decompose(A) -> BCDecomposition:
    """B = (A - A^T + tr(A) I) / 2 and C = (A + A^T - tr(A) I) / 2.

    The formulas are evaluated for any square A; the identity
    ||B||_F^2 - ||C||_F^2 = 2 det(A) and the similarity shape of B hold in 2-D.
    Works on a single matrix or a stack with shape (..., d, d).
    """
    A = np.asarray(A, dtype=float)
    At = np.swapaxes(A, -1, -2)
    tr = np.trace(A, axis1=-2, axis2=-1)[..., None, None]
    eye = np.eye(A.shape[-1])
    return BCDecomposition(B=(A - At + tr * eye) / 2.0, C=(A + At - tr * eye) / 2.0)


@dataclass(frozen=True)
class OrientationReport:
    determinants: np.ndarray
    normalized: np.ndarray
    classification: str
    degenerate_faces: tuple[int, ...]
    positive_faces: tuple[int, ...]
    negative_faces: tuple[int, ...]
    eps_det: float


def normalized_determinants(A: np.ndarray) -> np.ndarray:
    """det(A) / (||A||_F^2 / d)^(d/2), a scale-free value in [-1, 1]."""
    d = A.shape[-1]
    det = np.linalg.det(A)
    scale = (np.einsum("...ij,...ij->...", A, A) / d) ** (d / 2.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(scale > 0, det / np.where(scale > 0, scale, 1.0), 0.0)
    return out


def orientation_report(phi: SimplicialMap, eps_det: float = 1e-12) -> OrientationReport:
    """Classify a map as orientation preserving, reversing, mixed or degenerate.

    A face is degenerate when its normalized determinant has magnitude at most
    ``eps_det``; normalizing by the Frobenius norm makes the threshold
    independent of source and target scale.
    """
    dets = phi.determinants
    nd = normalized_determinants(phi.jacobians)
    degenerate = np.abs(nd) <= eps_det
    pos = (~degenerate) & (dets > 0)
    neg = (~degenerate) & (dets < 0)
    if degenerate.any():
        cls = DEGENERATE
    elif pos.any() and neg.any():
        cls = MIXED
    elif neg.any():
        cls = ORIENTATION_REVERSING
    else:
        cls = ORIENTATION_PRESERVING
    idx = lambda m: tuple(int(i) for i in np.nonzero(m)[0])
    return OrientationReport(determinants=dets, normalized=nd, classification=cls,
                             degenerate_faces=idx(degenerate), positive_faces=idx(pos),
                             negative_faces=idx(neg), eps_det=eps_det)


def gradient_norms(phi: SimplicialMap) -> np.ndarray:
    """Frobenius norm of each face's linear part."""
    return np.linalg.norm(phi.jacobians, axis=(1, 2))


def dirichlet_energy(phi: SimplicialMap) -> float:
    """Sum over triangles of ||A_j||_F^2 times the source area."""
    if phi.dim != 2:
        raise ParameterError("the Dirichlet energy is defined for triangle meshes only")
    return float(np.sum(gradient_norms(phi) ** 2 * phi.mesh.face_volumes))


def condition_numbers(phi: SimplicialMap) -> np.ndarray:
    s = np.linalg.svd(phi.jacobians, compute_uv=False)
    with np.errstate(divide="ignore"):
        return s[:, 0] / s[:, -1]


def harmonic_map(mesh: SimplicialMesh, boundary_positions: Mapping[int, np.ndarray] | np.ndarray,
                 ) -> SimplicialMap:
    """Tutte embedding: interior vertices at the average of their neighbours.

    ``boundary_positions`` gives the image of every boundary vertex, either as
    a mapping or as a (V, d) array whose boundary rows are used.
    """
    d, V = mesh.dim, mesh.n_vertices
    fixed = np.zeros((V, d))
    bmask = mesh.is_boundary_vertex
    if isinstance(boundary_positions, Mapping):
        missing = set(mesh.boundary_vertices.tolist()) - set(int(k) for k in boundary_positions)
        if missing:
            raise ParameterError(f"no position given for boundary vertices {sorted(missing)}")
        for v, p in boundary_positions.items():
            fixed[int(v)] = p
    else:
        arr = np.asarray(boundary_positions, dtype=float)
        fixed[bmask] = arr[bmask]
    e = mesh.edges
    W = sp.coo_matrix((np.ones(2 * len(e)), (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])),
                      shape=(V, V)).tocsr()
    L = sp.diags(np.asarray(W.sum(axis=1)).ravel()) - W
    interior = np.nonzero(~bmask)[0]
    out = fixed.copy()
    if interior.size:
        Lii = L[interior][:, interior].tocsc()
        rhs = -L[interior][:, np.nonzero(bmask)[0]] @ fixed[bmask]
        sol = spla.spsolve(Lii, rhs)
        out[interior] = np.asarray(sol).reshape(len(interior), d)
    return SimplicialMap(mesh, out)
