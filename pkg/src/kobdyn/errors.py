"""Exception hierarchy shared by all kobdyn modules."""


class KobdynError(Exception):
    """Base class for every error raised by kobdyn."""


class BoundaryProximity(KobdynError):
    """A point is too close to the boundary for a finite distance."""


class DomainEscape(KobdynError):
    """An iterate left the domain of the map."""


class NotConvergent(KobdynError):
    """A sequence does not approach the requested boundary point."""


class NotConverged(KobdynError):
    """A limit estimator hit its cap without settling.

    ``partial`` carries whatever was computed before giving up, so callers
    (the CLI in particular) can still report it.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class Inconclusive(KobdynError):
    """Diagnostics disagree or neither outcome could be established."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SamplingStarved(KobdynError):
    """Rejection sampling could not populate the requested region."""


class MonotonicityViolation(KobdynError):
    """A sequence that must be nonincreasing increased beyond slack."""


class HypothesisFailed(KobdynError):
    """A hypothesis of the sequence Lindelof criterion failed.

    ``which`` is 1 for the consecutive-step bound and 2 for the
    special-distance bound; ``index`` is the first offending term.
    """

    def __init__(self, which, index, value, bound):
        super().__init__(
            f"bound {which} violated at index {index}: {value!r} > {bound!r}")
        self.which = which
        self.index = index
        self.value = value
        self.bound = bound


class ConstraintViolated(KobdynError):
    def __init__(self, name, margin):
        super().__init__(f"constraint {name!r} violated (margin {margin:.3e})")
        self.name = name
        self.margin = margin


class NonzeroCInCaseTwo(KobdynError):
    """Parabolic normal form on the boundary case with a nonzero c block."""


class ConsistencyFailure(KobdynError):
    """A closed-form description disagrees with its sampling oracle."""


class SpecError(KobdynError):
    """A map or config document is malformed."""


class NotHyperbolic(KobdynError):
    """An operation defined for hyperbolic maps received another class."""
