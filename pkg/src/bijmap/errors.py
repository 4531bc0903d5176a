"""Exception hierarchy shared by all modules."""


class BijmapError(Exception):
    """Base class for every error raised by this package."""


class MeshError(BijmapError, ValueError):
    """Structural problem with a mesh or chain (non-manifold, unknown face, ...)."""


class DegreeUndefinedError(BijmapError, ValueError):
    """The query point lies on the image of the cycle, so the degree is undefined."""


class ParameterError(BijmapError, ValueError):
    """Invalid numerical parameter or target geometry."""


class AssignmentError(BijmapError, ValueError):
    """The boundary assignment is malformed or not topologically feasible."""


class UnsupportedTopologyError(BijmapError):
    """The mesh topology is valid but outside what the algorithm supports."""


class DegenerateFrameError(BijmapError, ValueError):
    """A similarity block is too small to define a rotation."""


class SolverError(BijmapError, RuntimeError):
    """The cone-program solver failed to return a usable solution."""


class ProblemFileError(BijmapError, ValueError):
    """Parse error in a problem file; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None, path: str | None = None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}".strip())
