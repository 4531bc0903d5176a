"""Bijective simplicial maps of meshes onto polygons: degree, certificates, optimization."""

from .certify import (Certificate, certify_T1, certify_T2, certify_T3, check_necessary)
from .degree import cycle_degree, preimage_count, theorem4_check
from .errors import (AssignmentError, BijmapError, DegenerateFrameError, DegreeUndefinedError,
                     MeshError, ParameterError, ProblemFileError, SolverError,
                     UnsupportedTopologyError)
from .maps import SimplicialMap, bc_decompose, dirichlet_energy, orientation_report
from .mesh import Chain, SimplicialMesh, boundary_cycle, boundary_operator, is_cycle
from .optimize import (BDParams, energy_phase, feasibility_phase, fixed_boundary_variant,
                       mu_from_K)
from .polygon import BoundaryAssignment, Polygon, assignment_feasibility

__all__ = [
    "AssignmentError", "BDParams", "BijmapError", "BoundaryAssignment", "Certificate", "Chain",
    "DegenerateFrameError", "DegreeUndefinedError", "MeshError", "ParameterError", "Polygon",
    "ProblemFileError", "SimplicialMap", "SimplicialMesh", "SolverError",
    "UnsupportedTopologyError", "assignment_feasibility", "bc_decompose", "boundary_cycle",
    "boundary_operator", "certify_T1", "certify_T2", "certify_T3", "check_necessary",
    "cycle_degree", "dirichlet_energy", "energy_phase", "feasibility_phase",
    "fixed_boundary_variant", "is_cycle", "mu_from_K", "orientation_report", "preimage_count",
    "theorem4_check",
]
