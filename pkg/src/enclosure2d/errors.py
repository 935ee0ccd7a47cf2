"""Exception types shared across the package."""


class Enclosure2DError(Exception):
    """Base class for all package errors."""


class ConfigError(Enclosure2DError):
    """Invalid experiment configuration; message names the offending key."""


class GeometryClash(Enclosure2DError):
    """Obstacle violates the clearance requirements of the mesh generator."""


class DegenerateSlices(Enclosure2DError):
    """Too many zero slice measures for a meaningful regularity fit."""


class QuadratureNotConverged(Enclosure2DError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ParseError(Enclosure2DError):
    """Mesh file could not be parsed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvariantViolation(Enclosure2DError):
    """A mesh failed its structural invariants on load or construction."""


class SingularSystem(Enclosure2DError):
    """Discrete system is singular (well-posedness assumption fails at the
    discrete level, e.g. an interior eigenvalue)."""


class MeshMismatch(Enclosure2DError):
    """Fields passed to an operation live on incompatible meshes."""


class ZeroDenominator(Enclosure2DError):
    """A norm ratio was requested with a vanishing denominator."""


class BornDiverged(Enclosure2DError):
    """Born iteration is not contracting (tau too small for this potential).

    ``factor`` records the observed contraction factor.
    """

    def __init__(self, factor: float, iterations: int):
        super().__init__(
            f"Born iteration diverging (contraction factor {factor:.3f} "
            f"after {iterations} iterations); increase tau or weaken the potential"
        )
        self.factor = factor
        self.iterations = iterations


class TooFewReliable(Enclosure2DError):
    """Fewer than three reliable indicator samples are available."""


class NonPositivePart(Enclosure2DError):
    """The selected indicator part vanishes on the fit window."""


class NoBracket(Enclosure2DError):
    """No grid point in the threshold scan exhibits the required decay."""


class EmptyIntersection(Enclosure2DError):
    """Half-plane intersection is empty (inconsistent support estimates)."""


class EmptyFamily(Enclosure2DError):
    """An operation over a family of probe fields received no usable members."""


class SourceTooClose(Enclosure2DError):
    """Probe point is within one element diameter of a boundary."""
