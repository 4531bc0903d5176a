"""Bounded-distortion mapping of triangle meshes onto polygons by cone programming.

Each face's linear part A_j splits as B_j + C_j (see :func:`bc_decompose`).
With a reference rotation R_j, the convex cone

    ||C_j||_F <= mu * tr(R_j^T B_j) / sqrt(2),   mu = (K - 1) / (K + 1)

forces det(A_j) > 0 and cond(A_j) <= K.  The solver first finds a map strictly
inside these cones (minimizing a shared slack t), then minimizes the Dirichlet
energy inside them, re-centring each R_j on its current B_j between solves.

Boundary constraints are eliminated exactly: every vertex image is written as
x = x0 + N z, where sliding vertices keep one degree of freedom along their
line and pinned vertices keep none.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .certify import EPS_CON_REL, boundary_bijection_evidence
from .coneprog import ConeProgram, SOC, solve_cone_program
from .errors import (AssignmentError, DegenerateFrameError, ParameterError,
                     SolverError, UnsupportedTopologyError)
from .maps import SimplicialMap, _cached_frames, bc_decompose, dirichlet_energy
from .mesh import SimplicialMesh
from .polygon import BoundaryAssignment, Pin, Polygon, assignment_feasibility

log = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


def mu_from_K(K: float) -> float:
    """mu = (K - 1) / (K + 1) for a condition-number bound K > 1."""
    K = float(K)
    if not K > 1.0 or not math.isfinite(K):
        raise ParameterError(f"K must be a finite number > 1, got {K}")
    return (K - 1.0) / (K + 1.0)


def closest_rotation(B, eps: float = 1e-14) -> np.ndarray:
    """The rotation nearest to a 2x2 similarity matrix [[a, -b], [b, a]]."""
    B = np.asarray(B, dtype=float)
    a = 0.5 * (B[0, 0] + B[1, 1])
    b = 0.5 * (B[1, 0] - B[0, 1])
    n = math.hypot(a, b)
    if n <= eps:
        raise DegenerateFrameError(f"similarity part has norm {n:.3g}; no closest rotation")
    return np.array([[a, -b], [b, a]]) / n


def _closest_rotations(B: np.ndarray, previous: np.ndarray, eps: float = 1e-14) -> np.ndarray:
    out = previous.copy()
    for j in range(len(B)):
        try:
            out[j] = closest_rotation(B[j], eps)
        except DegenerateFrameError:
            log.warning("face %d has a degenerate similarity part; keeping its rotation", j)
    return out


def bd_slack(A, R, mu: float) -> float:
    """mu tr(R^T B) / sqrt(2) - ||C||_F for one 2x2 matrix; positive inside the cone."""
    bc = bc_decompose(A)
    return float(mu * np.trace(np.asarray(R).T @ bc.B) / SQRT2 - np.linalg.norm(bc.C))


@dataclass(frozen=True)
class BDParams:
    """Bounded-distortion settings.

    ``eps_margin`` is absolute; when None it defaults to 1e-9 times the
    target polygon's diameter.  ``rotations`` defaults to the identity per face.
    """

    K: float = 15.0
    rotations: np.ndarray | None = None
    eps_margin: float | None = None
    max_outer: int = 10
    tol_energy: float = 1e-6
    solver_tol: float = 1e-9

    def __post_init__(self):
        mu_from_K(self.K)
        if self.rotations is not None:
            R = np.asarray(self.rotations, dtype=float)
            if R.ndim != 3 or R.shape[1:] != (2, 2):
                raise ParameterError("rotations must have shape (F, 2, 2)")
            orth = np.abs(np.swapaxes(R, 1, 2) @ R - np.eye(2)).max() if len(R) else 0.0
            if orth > 1e-9 or np.any(np.linalg.det(R) <= 0):
                raise ParameterError("rotations must be orthogonal with determinant +1")
        if self.max_outer < 1:
            raise ParameterError("max_outer must be at least 1")

    @property
    def mu(self) -> float:
        return mu_from_K(self.K)

    def margin(self, polygon: Polygon) -> float:
        return 1e-9 * polygon.diameter if self.eps_margin is None else float(self.eps_margin)

    def rotations_for(self, n_faces: int) -> np.ndarray:
        if self.rotations is None:
            return np.broadcast_to(np.eye(2), (n_faces, 2, 2)).copy()
        R = np.array(self.rotations, dtype=float)
        if len(R) != n_faces:
            raise ParameterError(f"{len(R)} rotations given for {n_faces} faces")
        return R


@dataclass
class SolveTrace:
    """Record of one phase: per outer iteration (value, max constraint violation).

    ``value`` is the optimal t in the feasibility phase and the Dirichlet
    energy in the energy phase.
    """

    phase: str
    iterations: list[tuple[float, float]]
    final_map: SimplicialMap | None
    status: str
    rotations: np.ndarray | None = None
    previous: SolveTrace | None = None
    initial_value: float | None = None

    @property
    def ok(self) -> bool:
        return self.status in ("feasible", "converged", "max_outer", "stalled")

    @property
    def values(self) -> list[float]:
        return [v for v, _ in self.iterations]


# ---------------------------------------------------------------- assembly
def face_operator(mesh: SimplicialMesh) -> sp.csr_matrix:
    """Sparse (4F, 2V) matrix taking stacked vertex images to stacked A_j.

    Row 4j + 2a + b holds entry (a, b) of A_j; image coordinate c of vertex v
    is variable 2v + c.
    """
    cached = mesh.__dict__.get("_face_operator")
    if cached is not None:
        return cached
    if mesh.dim != 2:
        raise ParameterError("bounded-distortion optimization is implemented for triangles")
    grad = _cached_frames(mesh).grad  # (F, 3, 2)
    F, V = mesh.n_faces, mesh.n_vertices
    rows, cols, vals = [], [], []
    for a in range(2):
        for b in range(2):
            for k in range(3):
                rows.append(4 * np.arange(F) + 2 * a + b)
                cols.append(2 * mesh.top_faces[:, k] + a)
                vals.append(grad[:, k, b])
    M = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(4 * F, 2 * V))
    mesh.__dict__["_face_operator"] = M
    return M


# (p, q, r, s) = T @ (a00, a01, a10, a11):  B = [[p, -q], [q, p]],  C = [[r, s], [s, -r]]
_PQRS = 0.5 * np.array([[1, 0, 0, 1],
                        [0, -1, 1, 0],
                        [1, 0, 0, -1],
                        [0, 1, 1, 0]], dtype=float)


def bd_constraint(mesh: SimplicialMesh, face_id: int, R, mu: float,
                  eps_margin: float = 0.0) -> SOC:
    """Cone ``||C_j||_F <= mu tr(R^T B_j) / sqrt(2) - eps_margin`` over the 2V image variables."""
    R = np.asarray(R, dtype=float)
    M = face_operator(mesh)[4 * face_id:4 * face_id + 4]
    pqrs = sp.csr_matrix(_PQRS) @ M
    c, sn = R[0, 0], R[1, 0]
    # ||C||_F = sqrt(2) ||(r, s)||;  tr(R^T B) = 2 (c p + sn q)
    G = SQRT2 * pqrs[2:4]
    f = SQRT2 * mu * (c * pqrs[0] + sn * pqrs[1])
    return SOC(G=sp.csr_matrix(G), h=np.zeros(2), f=sp.csr_matrix(f), g=-float(eps_margin))


@dataclass(frozen=True)
class BoundaryParam:
    """Affine parametrization x = x0 + N z of all admissible vertex images."""

    x0: np.ndarray
    N: sp.csr_matrix

    @property
    def n_free(self) -> int:
        return self.N.shape[1]

    def images(self, z: np.ndarray) -> np.ndarray:
        return (self.x0 + self.N @ z).reshape(-1, 2)


def _parametrize(mesh: SimplicialMesh, pins: Mapping[int, Pin] | None = None,
                 positions: Mapping[int, np.ndarray] | None = None) -> BoundaryParam:
    V = mesh.n_vertices
    x0 = np.zeros(2 * V)
    rows, cols, vals = [], [], []
    col = 0
    for v in range(V):
        if positions is not None and v in positions:
            x0[2 * v:2 * v + 2] = positions[v]
        elif pins is not None and v in pins:
            pin = pins[v]
            x0[2 * v:2 * v + 2] = pin.point
            if pin.kind == "line":
                rows += [2 * v, 2 * v + 1]
                cols += [col, col]
                vals += [pin.direction[0], pin.direction[1]]
                col += 1
        else:
            rows += [2 * v, 2 * v + 1]
            cols += [col, col + 1]
            vals += [1.0, 1.0]
            col += 2
    N = sp.csr_matrix((vals, (rows, cols)), shape=(2 * V, col))
    return BoundaryParam(x0=x0, N=N)


def _bd_blocks(mesh: SimplicialMesh, bp: BoundaryParam):
    """Per-face (p, q, r, s) as affine functions of z: value = L @ z + l0."""
    M = face_operator(mesh)
    T = sp.kron(sp.identity(mesh.n_faces), sp.csr_matrix(_PQRS)).tocsr()
    L = (T @ M @ bp.N).tocsr()
    l0 = T @ (M @ bp.x0)
    return L, l0


def _add_bd_cones(prog: ConeProgram, L, l0, rotations, mu, rhs_shift, t_index=None):
    n_z = L.shape[1]
    pad = prog.n - n_z
    for j in range(len(rotations)):
        blk = L[4 * j:4 * j + 4]
        b0 = l0[4 * j:4 * j + 4]
        c, sn = rotations[j, 0, 0], rotations[j, 1, 0]
        G = SQRT2 * blk[2:4]
        h = SQRT2 * b0[2:4]
        f = SQRT2 * mu * (c * blk[0] + sn * blk[1])
        g = SQRT2 * mu * (c * b0[0] + sn * b0[1]) + rhs_shift
        G = sp.hstack([G, sp.csr_matrix((2, pad))]).tocsr()
        f = sp.hstack([f, sp.csr_matrix((1, pad))]).tolil()
        if t_index is not None:
            f[0, t_index] = 1.0
        prog.add_soc(G, h, f.tocsr(), g)


def _face_slacks(phi: SimplicialMap, rotations: np.ndarray, mu: float) -> np.ndarray:
    bc = bc_decompose(phi.jacobians)
    tr = np.einsum("fji,fji->f", rotations, bc.B)
    return mu * tr / SQRT2 - np.linalg.norm(bc.C, axis=(1, 2))


# ----------------------------------------------------------------- phases
def _check_problem(mesh, polygon, assignment):
    if mesh.dim != 2 or mesh.ambient_dim not in (2, 3):
        raise UnsupportedTopologyError("optimization needs a triangle mesh")
    feas = assignment_feasibility(mesh, polygon, assignment)
    if not feas:
        raise AssignmentError(f"assignment is not topologically feasible: {feas.reason}")


def _feasibility(mesh: SimplicialMesh, polygon: Polygon, bp: BoundaryParam,
                 params: BDParams) -> SolveTrace:
    mu, eps = params.mu, params.margin(polygon)
    R = params.rotations_for(mesh.n_faces)
    L, l0 = _bd_blocks(mesh, bp)
    nz = bp.n_free
    # t is bounded below by the value a perfect similarity onto the target
    # scale would reach, so the program never becomes unbounded.
    sigma = math.sqrt(polygon.area / mesh.total_volume)
    t_floor = -SQRT2 * mu * sigma
    iters, best = [], None
    for _ in range(params.max_outer):
        c = np.zeros(nz + 1)
        c[nz] = 1.0
        prog = ConeProgram(n=nz + 1, c=c, lower={nz: t_floor},
                           names={"z": slice(0, nz), "t": slice(nz, nz + 1)})
        _add_bd_cones(prog, L, l0, R, mu, 0.0, t_index=nz)
        sol = solve_cone_program(prog, tol=params.solver_tol)
        t = float(sol.x[nz])
        phi = SimplicialMap(mesh, bp.images(sol.x[:nz]))
        viol = float(max(0.0, -(_face_slacks(phi, R, mu) + t).min()))
        iters.append((t, viol))
        if best is None or t < best[0]:
            best = (t, phi, R.copy())
        if t < -eps:
            return SolveTrace("feasibility", iters, phi, "feasible", rotations=R.copy())
        R = _closest_rotations(bc_decompose(phi.jacobians).B, R)
    log.warning("feasibility phase did not reach t < 0 (best t = %.3g)", best[0])
    return SolveTrace("feasibility", iters, best[1], "infeasible", rotations=best[2])


def feasibility_phase(mesh: SimplicialMesh, polygon: Polygon, assignment: BoundaryAssignment,
                      params: BDParams | None = None) -> SolveTrace:
    """Find a map strictly inside the distortion cones that satisfies the boundary assignment.

    Minimizes a slack t shared by all faces; succeeds once t < -eps_margin,
    otherwise re-centres the rotations and retries up to ``max_outer`` times.
    The returned trace has status "feasible" or "infeasible" (with the best
    map found).
    """
    params = params or BDParams()
    _check_problem(mesh, polygon, assignment)
    bp = _parametrize(mesh, pins=assignment.derived_pins)
    return _feasibility(mesh, polygon, bp, params)


def _energy(mesh: SimplicialMesh, polygon: Polygon, bp: BoundaryParam, params: BDParams,
            start: SimplicialMap, previous: SolveTrace | None = None) -> SolveTrace:
    mu, eps = params.mu, params.margin(polygon)
    R = _closest_rotations(bc_decompose(start.jacobians).B, params.rotations_for(mesh.n_faces))
    if _face_slacks(start, R, mu).min() <= 0:
        raise ParameterError("start map is not strictly inside the distortion cones")
    L, l0 = _bd_blocks(mesh, bp)
    nz = bp.n_free
    M = face_operator(mesh)
    w = np.repeat(np.sqrt(mesh.face_volumes), 4)
    W = sp.diags(w) @ M
    G_e = sp.hstack([W @ bp.N, sp.csr_matrix((W.shape[0], 1))]).tocsr()
    h_e = W @ bp.x0
    f_e = sp.csr_matrix(([1.0], ([0], [nz])), shape=(1, nz + 1))

    current = start
    e_prev = dirichlet_energy(start)
    iters: list[tuple[float, float]] = []
    status = "max_outer"
    for _ in range(params.max_outer):
        c = np.zeros(nz + 1)
        c[nz] = 1.0
        prog = ConeProgram(n=nz + 1, c=c, names={"z": slice(0, nz), "s": slice(nz, nz + 1)})
        prog.add_soc(G_e, h_e, f_e, 0.0)
        _add_bd_cones(prog, L, l0, R, mu, -eps)
        try:
            sol = solve_cone_program(prog, tol=params.solver_tol)
        except SolverError as exc:
            log.warning("energy solve failed (%s); returning best iterate", exc)
            status = "solver_failure"
            break
        phi = SimplicialMap(mesh, bp.images(sol.x[:nz]))
        e = dirichlet_energy(phi)
        viol = float(max(0.0, -_face_slacks(phi, R, mu).min()))
        if e > e_prev:
            # A rise within the convergence tolerance is solver round-off.
            status = "converged" if (e - e_prev) <= params.tol_energy * e_prev else "stalled"
            break
        iters.append((e, viol))
        decrease = (e_prev - e) / e_prev if e_prev > 0 else 0.0
        current, e_prev = phi, e
        R = _closest_rotations(bc_decompose(phi.jacobians).B, R)
        if decrease < params.tol_energy:
            status = "converged"
            break
    return SolveTrace("energy", iters, current, status, rotations=R, previous=previous,
                      initial_value=dirichlet_energy(start))


def energy_phase(mesh: SimplicialMesh, polygon: Polygon, assignment: BoundaryAssignment,
                 params: BDParams | None, start: SimplicialMap,
                 previous: SolveTrace | None = None) -> SolveTrace:
    """Minimize the Dirichlet energy inside the distortion cones with sliding boundary.

    Starts from a strictly feasible map, re-centres the rotations after every
    solve, and stops when the relative energy decrease drops below
    ``tol_energy``, when a solve fails to lower the energy, or after
    ``max_outer`` solves.
    """
    params = params or BDParams()
    _check_problem(mesh, polygon, assignment)
    bp = _parametrize(mesh, pins=assignment.derived_pins)
    return _energy(mesh, polygon, bp, params, start, previous)


def fixed_boundary_variant(mesh: SimplicialMesh, polygon: Polygon,
                           boundary_positions: Mapping[int, np.ndarray],
                           params: BDParams | None = None) -> SolveTrace:
    """Feasibility then energy minimization with every boundary vertex held in place.

    ``boundary_positions`` must place the boundary loop bijectively onto the
    polygon boundary; otherwise AssignmentError is raised.
    """
    params = params or BDParams()
    loops = mesh.boundary.loops
    if len(loops) != 1:
        raise UnsupportedTopologyError(f"mesh boundary has {len(loops)} loops")
    loop = np.asarray(loops[0])
    missing = [int(v) for v in loop if int(v) not in boundary_positions]
    if missing:
        raise AssignmentError(f"no position for boundary vertices {missing}")
    pts = np.array([boundary_positions[int(v)] for v in loop], dtype=float)
    ev = boundary_bijection_evidence(pts, loop, polygon, EPS_CON_REL * polygon.diameter)
    if ev:
        raise AssignmentError(f"boundary placement is not a bijection onto the polygon: {ev[0]}")
    positions = {int(v): np.asarray(p, dtype=float) for v, p in boundary_positions.items()}
    bp = _parametrize(mesh, positions=positions)
    feas = _feasibility(mesh, polygon, bp, params)
    if feas.status != "feasible":
        return replace(feas, previous=None)
    return _energy(mesh, polygon, bp, replace(params, rotations=feas.rotations),
                   feas.final_map, previous=feas)
