"""Exception hierarchy for the polarimetry toolkit."""


class PolarimetryError(ValueError):
    """Base class for every error raised by this package."""


class ZeroIntensity(PolarimetryError):
    pass


class NotAState(PolarimetryError):
    """A matrix is not Hermitian positive semidefinite within tolerance."""


class NotPure(PolarimetryError):
    pass


class Unphysical(PolarimetryError):
    """Degree of polarization exceeds one."""


class DegenerateFrame(PolarimetryError):
    pass


class Singular(PolarimetryError):
    """Instrument matrix is not invertible (condition number too large)."""


class Coplanar(Singular):
    """Calibration states do not span the Stokes space."""


class EmptyCounts(PolarimetryError):
    pass


class NegativeIntensity(PolarimetryError):
    pass
