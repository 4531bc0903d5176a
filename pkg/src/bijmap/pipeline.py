"""End-to-end solve: optimize, certify, and write the mapped mesh, report and drawings."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .certify import Certificate, certify_T1, certify_T2, certify_T3, check_necessary
from .degree import cycle_degree
from .errors import BijmapError
from .io import LoadedProblem, write_obj
from .maps import SimplicialMap, dirichlet_energy, gradient_norms
from .mesh import boundary_cycle
from .optimize import SolveTrace, energy_phase, feasibility_phase, fixed_boundary_variant
from .polygon import assignment_feasibility, uniform_boundary_positions
from .render import render_svg

log = logging.getLogger(__name__)

# The certificate each mode is expected to earn.
REQUESTED = {"free": "T2", "feasibility": "T2", "fixed-uniform": "T1"}


@dataclass
class RunReport:
    mode: str
    status: str  # "ok" or "failed"
    failure_stage: str | None = None
    message: str | None = None
    certificates: dict[str, dict] = field(default_factory=dict)
    feasibility_trace: list[tuple[float, float]] = field(default_factory=list)
    energy_trace: list[tuple[float, float]] = field(default_factory=list)
    energy: float | None = None
    gradient_norms: list[float] = field(default_factory=list)
    boundary_degree_samples: dict[str, int] = field(default_factory=dict)
    timing: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)
    seed: int = 0

    @property
    def requested(self) -> str:
        return REQUESTED[self.mode]

    @property
    def granted(self) -> bool:
        cert = self.certificates.get(self.requested)
        return self.status == "ok" and cert is not None and cert["verdict"] == "certified"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def certify_all(phi: SimplicialMap, problem: LoadedProblem) -> dict[str, Certificate]:
    eps = problem.eps_con
    out = {"necessary": check_necessary(phi), "T1": certify_T1(phi, problem.polygon, eps_con=eps)}
    if assignment_feasibility(phi.mesh, problem.polygon, problem.assignment):
        out["T2"] = certify_T2(phi, problem.polygon, problem.assignment, eps_con=eps)
        out["T3"] = certify_T3(phi, problem.polygon, problem.assignment, eps_con=eps)
    return out


def _degree_samples(phi: SimplicialMap, problem: LoadedProblem, n: int = 32) -> dict[str, int]:
    """Boundary degree at random points inside and outside the polygon, away from edge lines."""
    rng = np.random.default_rng(problem.seed)
    poly = problem.polygon
    lo, hi = poly.vertices.min(axis=0), poly.vertices.max(axis=0)
    pad = 0.25 * (hi - lo)
    cyc = boundary_cycle(phi.mesh)
    counts = {"inside_deg1": 0, "inside_total": 0, "outside_deg0": 0, "outside_total": 0}
    tries = 0
    while counts["inside_total"] + counts["outside_total"] < n and tries < 20 * n:
        tries += 1
        q = rng.uniform(lo - pad, hi + pad)
        if poly.distance_to_lines(q)[0] <= 1e-6 * poly.diameter:
            continue
        try:
            deg = cycle_degree(phi, cyc, q, seed=problem.seed)
        except BijmapError:
            continue
        if poly.contains(q)[0]:
            counts["inside_total"] += 1
            counts["inside_deg1"] += int(deg == 1)
        else:
            counts["outside_total"] += 1
            counts["outside_deg0"] += int(deg == 0)
    return counts


def _solve(problem: LoadedProblem) -> tuple[SolveTrace | None, SolveTrace]:
    mesh, poly, A, params = problem.mesh, problem.polygon, problem.assignment, problem.params
    if problem.mode == "fixed-uniform":
        positions = uniform_boundary_positions(mesh, poly, A)
        trace = fixed_boundary_variant(mesh, poly, positions, params)
        return trace.previous, trace
    feas = feasibility_phase(mesh, poly, A, params)
    if problem.mode == "feasibility" or feas.status != "feasible":
        return None, feas
    return feas, energy_phase(mesh, poly, A, params, feas.final_map, previous=feas)


def run(problem: LoadedProblem, out_dir) -> RunReport:
    """Solve one problem and write mapped.obj, report.json, mapped.svg and gradient.svg.

    Failures in any stage produce a report with ``status == "failed"`` and
    the stage name; whatever map exists at that point is still written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(mode=problem.mode, status="ok", seed=problem.seed,
                       notes=list(problem.notes))
    t0 = time.perf_counter()
    feas = assignment_feasibility(problem.mesh, problem.polygon, problem.assignment)
    if not feas:
        report.status, report.failure_stage = "failed", "assignment"
        report.message = feas.reason
        return _finish(report, None, problem, out, t0)
    try:
        first, last = _solve(problem)
    except BijmapError as exc:
        report.status, report.failure_stage, report.message = "failed", "solve", str(exc)
        return _finish(report, None, problem, out, t0)
    report.timing["solve_s"] = time.perf_counter() - t0
    feas_trace = first if first is not None else (last if last.phase == "feasibility" else None)
    if feas_trace is not None:
        report.feasibility_trace = [tuple(map(float, it)) for it in feas_trace.iterations]
    if last.phase == "energy":
        report.energy_trace = [tuple(map(float, it)) for it in last.iterations]
    if last.phase == "feasibility" and last.status != "feasible":
        report.status, report.failure_stage = "failed", "feasibility"
        report.message = f"no strictly feasible map found (best t = {min(last.values):.3g})"
    elif last.phase == "energy" and last.status == "solver_failure":
        report.notes.append("energy solve failed; reporting the best accepted iterate")
    return _finish(report, last.final_map, problem, out, t0)


def _finish(report: RunReport, phi: SimplicialMap | None, problem: LoadedProblem,
            out: Path, t0: float) -> RunReport:
    if phi is not None:
        t1 = time.perf_counter()
        certs = certify_all(phi, problem)
        report.certificates = {k: c.to_dict() for k, c in certs.items()}
        report.timing["certify_s"] = time.perf_counter() - t1
        report.energy = dirichlet_energy(phi)
        report.gradient_norms = [float(x) for x in gradient_norms(phi)]
        if certs.get("T2") is not None and certs["T2"].certified:
            report.boundary_degree_samples = _degree_samples(phi, problem)
        write_obj(out / "mapped.obj", problem.mesh, phi.images)
        (out / "mapped.svg").write_text(render_svg(phi, problem.polygon, "none"))
        (out / "gradient.svg").write_text(render_svg(phi, problem.polygon, "gradient_norm"))
        report.artifacts = {"mapped_obj": "mapped.obj", "mapped_svg": "mapped.svg",
                            "gradient_svg": "gradient.svg"}
    report.artifacts["report"] = "report.json"
    report.timing["total_s"] = time.perf_counter() - t0
    (out / "report.json").write_text(report.to_json())
    return report
