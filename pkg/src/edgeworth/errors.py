"""Exception types shared across the package.

Every failure mode that callers are expected to handle has its own class so
that library users (and the command line driver) can map problems to exit
codes without string matching.
"""


class EdgeworthError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(EdgeworthError):
    """Invalid input data or configuration."""


class OracleInfeasible(EdgeworthError):
    """A brute-force oracle cannot run within its resource bounds."""


# --- jets ---------------------------------------------------------------

class DivByZeroConstantTerm(ValidationError):
    """Jet division by a series whose constant term vanishes."""


class LogOfZeroConstantTerm(ValidationError):
    """Jet logarithm of a series whose constant term vanishes."""


# --- spectral -----------------------------------------------------------

class NonStochasticModel(ValidationError):
    """Transition matrix rows do not sum to one."""


class NegativeProbability(ValidationError):
    """Negative entry in a probability vector or transition matrix."""


class SingularStationarySolve(EdgeworthError):
    """The stationary-distribution linear system is singular."""


class GapBelowTolerance(EdgeworthError):
    """Spectral gap of the transition matrix is numerically zero."""


class BorderedSolveSingular(EdgeworthError):
    """The bordered eigenvalue-perturbation system is singular."""


# --- expansion ----------------------------------------------------------

class DegenerateVariance(EdgeworthError):
    """Asymptotic variance is not positive."""


class NonRealDrift(EdgeworthError):
    """Asymptotic mean has a non-negligible imaginary part."""


class ImaginaryResidue(EdgeworthError):
    """A coefficient that must be real carries imaginary residue."""


class DegreeOverflow(EdgeworthError):
    """A polynomial exceeds its guaranteed degree bound."""


class NonZeroMean(EdgeworthError):
    """A density-level polynomial has nonzero Gaussian mean and cannot be
    antidifferentiated within the Hermite ladder."""


# --- models -------------------------------------------------------------

class InconsistentDimensions(ValidationError):
    """Matrix and vector shapes of a model do not agree."""


class InsufficientMoments(ValidationError):
    """Too few moments supplied for the requested expansion order."""


class SlopeBelowOne(ValidationError):
    """A piecewise map branch is not uniformly expanding."""


# --- oracle -------------------------------------------------------------

class TableTooLarge(OracleInfeasible):
    """Lattice dynamic program would exceed its cell budget."""


class TooManyValues(OracleInfeasible):
    """Enumeration would exceed its distinct-value budget."""


class OracleUnavailable(OracleInfeasible):
    """No oracle can produce the requested reference quantity."""


# --- evaluate -----------------------------------------------------------

class QuadratureNotConverged(EdgeworthError):
    """Adaptive Simpson refinement hit its point budget before tolerance."""
