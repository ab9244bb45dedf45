"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`HILError`,
so callers (and the command line front-end) can tell input problems apart
from genuine bugs.
"""

from __future__ import annotations


class HILError(Exception):
    """Base class for all library errors."""


# --- mesh construction -----------------------------------------------------
class MeshError(HILError):
    pass


class NonManifold(MeshError):
    pass


class DegenerateFace(MeshError):
    pass


class InconsistentOrientation(MeshError):
    pass


class ZeroVertexArea(MeshError):
    pass


class FieldSizeMismatch(HILError, ValueError):
    pass


class OriginOnSurface(HILError):
    pass


class SupportViolation(HILError):
    """A test function does not vanish where it is required to."""


# --- revolution profiles ---------------------------------------------------
class NonPositiveRadius(HILError, ValueError):
    pass


class NonSmoothProfile(HILError, ValueError):
    pass


class StepperFailure(HILError):
    pass


# --- quadrature ------------------------------------------------------------
class QuadratureError(HILError):
    pass


class SingularityUnprotected(QuadratureError):
    pass


class ExponentOutOfRange(QuadratureError, ValueError):
    pass


class SingularIntegrand(QuadratureError):
    pass


# --- corpus ----------------------------------------------------------------
class BadSpec(HILError, ValueError):
    pass


class SupportOutsideSurface(HILError, ValueError):
    pass


# --- inequalities ----------------------------------------------------------
class ParamOutOfRange(HILError, ValueError):
    pass


class NotMinimal(HILError):
    pass


class DimensionTooLow(HILError, ValueError):
    pass


class SupportExceedsBall(HILError):
    pass


# --- isoperimetry ----------------------------------------------------------
class TouchesBoundary(HILError):
    pass


class NotFlat(HILError):
    pass


class EmptyIntersection(HILError):
    pass


# --- foliation -------------------------------------------------------------
class DegenerateLevel(HILError):
    pass


# --- sharpness -------------------------------------------------------------
class NonQuadratic(HILError, ValueError):
    pass


class SolverStall(HILError):
    pass


class SingularPencil(HILError):
    pass
