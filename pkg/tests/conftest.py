from __future__ import annotations

import time
from dataclasses import dataclass

import pytest

from bijmap.fixtures import Problem, grid_disk, lshape
from bijmap.optimize import (BDParams, SolveTrace, energy_phase, feasibility_phase,
                             fixed_boundary_variant)
from bijmap.polygon import uniform_boundary_positions


@dataclass
class Solved:
    problem: Problem
    feas: SolveTrace
    free: SolveTrace
    fixed: SolveTrace
    seconds: float


def solve_fixture(P: Problem, K: float = 15.0) -> Solved:
    t0 = time.perf_counter()
    params = BDParams(K=K)
    feas = feasibility_phase(P.mesh, P.polygon, P.assignment, params)
    free = energy_phase(P.mesh, P.polygon, P.assignment, params, feas.final_map, previous=feas)
    positions = uniform_boundary_positions(P.mesh, P.polygon, P.assignment)
    fixed = fixed_boundary_variant(P.mesh, P.polygon, positions, params)
    return Solved(P, feas, free, fixed, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def solved():
    """Free and fixed-boundary solutions for the pipeline fixtures, computed once."""
    return {name: solve_fixture(P) for name, P in
            [("grid_disk", grid_disk(10)), ("grid_disk_5x5", grid_disk(4)), ("lshape", lshape(6))]}


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
