"""Exception hierarchy shared by all tailproc modules."""


class TailProcError(Exception):
    """Base class for every error raised by tailproc."""


class InvalidPath(TailProcError, ValueError):
    pass


class InvalidLaw(TailProcError, ValueError):
    pass


class ZeroPivot(TailProcError, ValueError):
    """Shift-and-scale requested at an index where the path vanishes."""


class ContractViolation(TailProcError, ValueError):
    """A test functional was nonzero on a path whose value at 0 is 0."""


class NotASpectralLaw(TailProcError, ValueError):
    """The law is not invariant under the RS-transform."""


class BoundaryAtom(TailProcError, ValueError):
    """The boundary of a set carries positive mass of the marginal law."""


class DegenerateThreshold(TailProcError, ValueError):
    """No observation in the core range strictly exceeds the threshold."""


class PaddingViolation(TailProcError, ValueError):
    """The series is too short around its core range for the requested windows."""


class TooFewExceedances(TailProcError, ValueError):
    pass


class ReferenceUnavailable(TailProcError, RuntimeError):
    pass


class AllReplicationsFailed(TailProcError, RuntimeError):
    pass
