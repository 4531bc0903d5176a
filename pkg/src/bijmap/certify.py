"""Certifiers for bijectivity of planar simplicial maps onto a polygon.

Each certifier returns a :class:`Certificate`.  A refuted certificate carries
structured evidence (face ids, residuals, offending boundary runs); a
certified one carries none.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import AssignmentError
from .maps import ORIENTATION_PRESERVING, SimplicialMap, orientation_report
from .polygon import (BoundaryAssignment, Polygon, assignment_feasibility,
                      boundary_runs)

CERTIFIED = "certified"
REFUTED = "refuted"

EPS_CON_REL = 1e-8
EPS_MONO_REL = 1e-9


@dataclass(frozen=True)
class Certificate:
    theorem: str
    verdict: str
    evidence: tuple[dict, ...] = ()
    tolerances: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in (CERTIFIED, REFUTED):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == CERTIFIED and self.evidence:
            raise ValueError("a certified verdict cannot carry evidence")

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def __bool__(self) -> bool:
        return self.certified

    def to_dict(self) -> dict[str, Any]:
        return {"theorem": self.theorem, "verdict": self.verdict,
                "evidence": [dict(e) for e in self.evidence],
                "tolerances": dict(self.tolerances)}


def _make(theorem: str, evidence: list[dict], tolerances: dict) -> Certificate:
    return Certificate(theorem=theorem, verdict=REFUTED if evidence else CERTIFIED,
                       evidence=tuple(evidence), tolerances=dict(tolerances))


def _necessary_evidence(phi: SimplicialMap, eps_det: float) -> list[dict]:
    rep = orientation_report(phi, eps_det)
    if rep.classification == ORIENTATION_PRESERVING:
        return []
    ev = []
    for j in rep.degenerate_faces:
        ev.append({"kind": "degenerate_face", "face": j,
                   "det": float(rep.determinants[j]), "normalized": float(rep.normalized[j])})
    for j in rep.negative_faces:
        ev.append({"kind": "reversed_face", "face": j, "det": float(rep.determinants[j])})
    return ev


def check_necessary(phi: SimplicialMap, eps_det: float = 1e-12) -> Certificate:
    """Every face keeps its orientation (positive, non-degenerate determinant)."""
    return _make("necessary", _necessary_evidence(phi, eps_det), {"eps_det": eps_det})


def _eps_con(polygon: Polygon, eps_con: float | None) -> float:
    return EPS_CON_REL * polygon.diameter if eps_con is None else float(eps_con)


def boundary_bijection_evidence(points, loop, polygon: Polygon, eps: float) -> list[dict]:
    """Reasons why a closed vertex loop placed at ``points`` fails to trace the
    polygon boundary exactly once, counterclockwise (empty when it does)."""
    loop = np.asarray(loop)
    s, dist = polygon.boundary_parameter(points)
    ev = [{"kind": "off_boundary", "vertex": int(loop[i]), "residual": float(dist[i])}
          for i in np.nonzero(dist > eps)[0]]
    if ev:
        return ev
    P = polygon.perimeter
    steps = np.mod(np.roll(s, -1) - s, P)
    corners = polygon.cumulative
    for i, step in enumerate(steps):
        a, b = int(loop[i]), int(loop[(i + 1) % len(loop)])
        if step <= eps or step >= P - eps:
            ev.append({"kind": "non_increasing", "edge": [a, b], "advance": float(step)})
            continue
        # A corner strictly inside the arc (s_i, s_i + step) means the straight
        # edge image cuts across the polygon instead of following its boundary.
        rel = np.mod(corners - s[i], P)
        inside = np.nonzero((rel > eps) & (rel < step - eps))[0]
        if inside.size:
            ev.append({"kind": "corner_skipped", "edge": [a, b],
                       "corners": [int(c) for c in inside]})
    total = float(steps.sum())
    if not ev and abs(total - P) > eps * len(loop):
        ev.append({"kind": "winding", "advance": total, "perimeter": P})
    return ev


def certify_T1(phi: SimplicialMap, polygon: Polygon, *, eps_con: float | None = None,
               eps_det: float = 1e-12) -> Certificate:
    """Orientation preserving faces plus a boundary map that is a bijection onto the polygon boundary.

    Boundary bijectivity is checked on vertex images: each lies on the polygon
    boundary, their arc-length parameters advance strictly around the loop and
    sum to one perimeter, and no polygon corner falls strictly inside the
    arc spanned by a single mesh edge (so each edge maps onto the boundary).
    """
    eps = _eps_con(polygon, eps_con)
    tol = {"eps_con": eps, "eps_det": eps_det}
    ev = _necessary_evidence(phi, eps_det)
    loops = phi.mesh.boundary.loops
    if len(loops) != 1:
        ev.append({"kind": "boundary_loops", "count": len(loops)})
        return _make("T1", ev, tol)
    loop = np.asarray(loops[0])
    ev += boundary_bijection_evidence(phi.images[loop], loop, polygon, eps)
    return _make("T1", ev, tol)


def _require_feasible(phi: SimplicialMap, polygon: Polygon, assignment: BoundaryAssignment):
    feas = assignment_feasibility(phi.mesh, polygon, assignment)
    if not feas:
        raise AssignmentError(f"assignment is not topologically feasible: {feas.reason}")


def _t2_evidence(phi: SimplicialMap, polygon: Polygon, assignment: BoundaryAssignment,
                 eps: float) -> list[dict]:
    ev = []
    for (a, b), k in sorted(assignment.edge_to_polyedge.items()):
        r = polygon.edge_line_residuals(phi.images[[a, b]], k)
        worst = float(np.abs(r).max())
        if worst > eps:
            ev.append({"kind": "edge_off_line", "edge": [a, b], "polygon_edge": k,
                       "residual": worst})
    for v, pin in sorted(assignment.derived_pins.items()):
        p = phi.images[v]
        if pin.kind == "pinned":
            r = float(np.linalg.norm(p - pin.point))
        else:
            d = p - pin.point
            r = float(abs(d[0] * pin.direction[1] - d[1] * pin.direction[0]))
        if r > eps:
            ev.append({"kind": "pin_violated", "vertex": int(v), "pin": pin.kind,
                       "polygon_edges": list(pin.edges), "residual": r})
    return ev


def certify_T2(phi: SimplicialMap, polygon: Polygon, assignment: BoundaryAssignment, *,
               eps_con: float | None = None, eps_det: float = 1e-12) -> Certificate:
    """Orientation preserving faces plus every boundary edge on the line of its assigned polygon edge.

    A certified verdict means the map is injective on the interior and covers
    the polygon exactly; it says nothing about injectivity on the boundary.
    Raises AssignmentError if the assignment is not topologically feasible.
    """
    _require_feasible(phi, polygon, assignment)
    eps = _eps_con(polygon, eps_con)
    ev = _necessary_evidence(phi, eps_det)
    ev += _t2_evidence(phi, polygon, assignment, eps)
    return _make("T2", ev, {"eps_con": eps, "eps_det": eps_det})


def monotone_chain_violations(params: Sequence[float], start: float, end: float, *,
                              eps_end: float, eps_mono: float) -> list[dict]:
    """One-dimensional base case: a vertex chain mapped into the segment [start, end].

    The chain is bijective onto the segment when it begins at ``start``, ends
    at ``end`` and every step strictly increases.  Returns one record per
    violation (empty when the chain passes).
    """
    t = np.asarray(params, dtype=float)
    out = []
    if abs(t[0] - start) > eps_end:
        out.append({"kind": "run_start", "residual": float(t[0] - start)})
    if abs(t[-1] - end) > eps_end:
        out.append({"kind": "run_end", "residual": float(t[-1] - end)})
    for i, step in enumerate(np.diff(t)):
        if step < -eps_mono:
            out.append({"kind": "reversed_edge", "position": i, "step": float(step)})
        elif step <= eps_mono:
            out.append({"kind": "non_strict", "position": i, "step": float(step)})
    return out


def certify_T3(phi: SimplicialMap, polygon: Polygon, assignment: BoundaryAssignment, *,
               eps_con: float | None = None, eps_det: float = 1e-12) -> Certificate:
    """The T2 conditions plus orientation preservation on the boundary.

    For every polygon edge, the boundary vertices assigned to it must map to
    strictly increasing positions along the edge direction, starting and
    ending at its corners.
    """
    _require_feasible(phi, polygon, assignment)
    eps = _eps_con(polygon, eps_con)
    ev = _necessary_evidence(phi, eps_det)
    ev += _t2_evidence(phi, polygon, assignment, eps)
    for k, run in sorted(boundary_runs(phi.mesh, assignment, polygon.n_edges).items()):
        a = polygon.starts[k]
        t = (phi.images[run] - a) @ polygon.directions[k]
        for item in monotone_chain_violations(t, 0.0, float(polygon.lengths[k]), eps_end=eps,
                                              eps_mono=EPS_MONO_REL * polygon.lengths[k]):
            item = {"polygon_edge": k, **item}
            if "position" in item:
                i = item.pop("position")
                item["edge"] = [int(run[i]), int(run[i + 1])]
            else:
                item["run"] = [int(v) for v in run]
            ev.append(item)
    return _make("T3", ev, {"eps_con": eps, "eps_det": eps_det,
                            "eps_mono_rel": EPS_MONO_REL})
