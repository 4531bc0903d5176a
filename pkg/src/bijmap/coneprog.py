"""A small second-order cone program container and its solver binding.

The program is

    minimize    c @ x
    subject to  A_eq @ x == b_eq
                lower <= x[i]                   (optional bounds)
                ||G_k @ x + h_k||_2 <= f_k @ x + g_k   for every cone k

and is handed to Clarabel's interior-point method.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError, SolverError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SOC:
    """``||G x + h|| <= f x + g`` over the full variable vector."""

    G: sp.csr_matrix
    h: np.ndarray
    f: sp.csr_matrix  # shape (1, n)
    g: float

    @property
    def size(self) -> int:
        return 1 + self.G.shape[0]

    def slack(self, x: np.ndarray) -> float:
        """Right side minus left side; negative means violated."""
        return float((self.f @ x)[0] + self.g - np.linalg.norm(self.G @ x + self.h))


@dataclass
class ConeProgram:
    n: int
    c: np.ndarray
    A_eq: sp.csr_matrix | None = None
    b_eq: np.ndarray | None = None
    lower: dict[int, float] = field(default_factory=dict)
    socs: list[SOC] = field(default_factory=list)
    names: dict[str, slice] = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        if self.c.shape != (self.n,):
            raise ParameterError(f"objective has shape {self.c.shape}, expected ({self.n},)")

    def add_soc(self, G, h, f, g: float) -> None:
        G = sp.csr_matrix(G)
        f = sp.csr_matrix(np.atleast_2d(f) if not sp.issparse(f) else f)
        h = np.asarray(h, dtype=float).ravel()
        if G.shape[1] != self.n or f.shape != (1, self.n) or h.shape != (G.shape[0],):
            raise ParameterError("cone dimensions do not match the variable count")
        self.socs.append(SOC(G, h, f, float(g)))

    def add_equalities(self, A, b) -> None:
        A = sp.csr_matrix(A)
        b = np.asarray(b, dtype=float).ravel()
        if A.shape[1] != self.n or A.shape[0] != b.shape[0]:
            raise ParameterError("equality dimensions do not match the variable count")
        if self.A_eq is None:
            self.A_eq, self.b_eq = A, b
        else:
            self.A_eq = sp.vstack([self.A_eq, A]).tocsr()
            self.b_eq = np.concatenate([self.b_eq, b])

    def max_violation(self, x: np.ndarray) -> float:
        """Largest violation over equalities, bounds and cones (0 when feasible)."""
        worst = 0.0
        if self.A_eq is not None and self.A_eq.shape[0]:
            worst = max(worst, float(np.abs(self.A_eq @ x - self.b_eq).max()))
        for i, lo in self.lower.items():
            worst = max(worst, lo - float(x[i]))
        for cone in self.socs:
            worst = max(worst, -cone.slack(x))
        return worst


@dataclass(frozen=True)
class ConeSolution:
    x: np.ndarray
    objective: float
    status: str
    iterations: int
    solve_time: float


_OK = {"Solved", "AlmostSolved"}


def solve_cone_program(prog: ConeProgram, *, tol: float = 1e-9, max_iter: int = 200,
                       verbose: bool = False) -> ConeSolution:
    """Solve with Clarabel. Raises SolverError unless the status is (almost) solved."""
    import clarabel

    rows, rhs, cones = [], [], []
    if prog.A_eq is not None and prog.A_eq.shape[0]:
        rows.append(prog.A_eq)
        rhs.append(prog.b_eq)
        cones.append(clarabel.ZeroConeT(prog.A_eq.shape[0]))
    if prog.lower:
        idx = sorted(prog.lower)
        # x_i - lo >= 0  <=>  s = -lo - (-x_i)
        rows.append(sp.csr_matrix((-np.ones(len(idx)), (np.arange(len(idx)), idx)),
                                  shape=(len(idx), prog.n)))
        rhs.append(-np.array([prog.lower[i] for i in idx]))
        cones.append(clarabel.NonnegativeConeT(len(idx)))
    for cone in prog.socs:
        rows.append(-sp.vstack([cone.f, cone.G]))
        rhs.append(np.concatenate([[cone.g], cone.h]))
        cones.append(clarabel.SecondOrderConeT(cone.size))
    if not rows:
        raise ParameterError("cone program has no constraints")
    A = sp.vstack(rows).tocsc()
    b = np.concatenate(rhs)
    P = sp.csc_matrix((prog.n, prog.n))

    settings = clarabel.DefaultSettings()
    settings.verbose = verbose
    settings.tol_gap_abs = tol
    settings.tol_gap_rel = tol
    settings.tol_feas = tol
    settings.max_iter = max_iter
    solver = clarabel.DefaultSolver(P, prog.c, A, b, cones, settings)
    sol = solver.solve()
    status = str(sol.status)
    if status not in _OK:
        raise SolverError(f"cone program solve failed with status {status}")
    if status != "Solved":
        log.warning("cone program solved to reduced accuracy (%s)", status)
    x = np.asarray(sol.x, dtype=float)
    return ConeSolution(x=x, objective=float(prog.c @ x), status=status,
                        iterations=int(sol.iterations), solve_time=float(sol.solve_time))
