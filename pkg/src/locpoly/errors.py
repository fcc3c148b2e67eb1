"""Exception types raised by the estimation and simulation routines."""


class LocpolyError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class SingularDesign(LocpolyError):
    """Local design matrix is singular or too ill-conditioned at the point."""


class DegenerateSpec(LocpolyError):
    """Bandwidth formula inputs give an unbounded or zero bandwidth."""


class NoValidBandwidth(LocpolyError):
    """Cross-validation objective is undefined on the whole search grid."""


class DegenerateDensity(LocpolyError):
    """Estimated design density at the evaluation point is (numerically) zero."""


class DegenerateSample(LocpolyError):
    """Sample has no spread, so a rule-of-thumb bandwidth is undefined."""


class CellFailed(LocpolyError):
    """Too many Monte Carlo replications were excluded from a table cell."""
