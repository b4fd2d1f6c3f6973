"""Exception hierarchy shared by all isochron modules."""


class IsochronError(Exception):
    """Base class for all package errors."""


class LengthMismatch(IsochronError):
    """Coefficient sequence has the wrong length for the declared degree."""


class ZeroPolynomial(IsochronError):
    """A root finder or resultant was handed the zero polynomial."""


class DegenerateResultant(IsochronError):
    """Resultant of polynomials that share a factor or are identically zero."""


class NonIsolatedSingularities(IsochronError):
    """The critical locus contains a curve (Hamiltonian of x^N y^N form)."""


class LinearSystem(IsochronError):
    """Operation needs a nonlinear part but H_{n+1} is identically zero."""


class EmptyCarrier(IsochronError):
    """Newton polygon requested for a polynomial with empty carrier."""


class CharacteristicDegenerate(IsochronError):
    """A Newton polygon segment produced a degenerate characteristic equation."""


class BranchFailure(IsochronError):
    """Puiseux branch expansion failed or truncation order is insufficient."""


class BranchJump(IsochronError):
    """A lifted loop jumped between y-branches; radius retries exhausted."""


class NewtonDivergence(IsochronError):
    """Newton iteration failed to reach its residual target."""


class QuadratureStall(IsochronError):
    """Doubling the sample count twice failed to reach the error target."""


class RamificationCollision(IsochronError):
    """A continued loop sample ran into a ramification point of the fiber."""


class BlowupChartFailure(IsochronError):
    """Loop radius in the blow-up chart cannot avoid the exceptional divisor."""


class TrackingLost(IsochronError):
    """Nearest-neighbor matching became ambiguous while tracking solutions."""


class CaseMismatch(IsochronError):
    """System coefficients do not match the requested monodromy case."""


class HypothesisNotMet(IsochronError):
    """Spec fails the hypotheses of the selected theorem pipeline."""


class ParseError(IsochronError):
    """Malformed system specification document."""
