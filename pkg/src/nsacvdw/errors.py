"""Exception types raised across the package."""


class NsacError(Exception):
    """Base class for every error raised by nsacvdw."""


class DomainError(NsacError, ValueError):
    """An argument lies outside the admissible domain (e.g. v <= b + h)."""


class NoSpinodal(NsacError):
    """The isotherm is monotone (theta >= theta_c): no spinodal points."""


class CutoffConflict(NsacError):
    """The cutoff b + h hides part of the spinodal or coexistence interval."""


class NoPositiveEquilibrium(NsacError):
    """No positive equal-area pressure exists on this isotherm."""


class BoundViolation(NsacError):
    """A state field violates v > b + h or theta > 0."""


class ProfileError(NsacError):
    """An initial profile cannot be built with the requested data."""


class AdmissibilityError(NsacError):
    """The far-field state is not admissible for the requested temperature."""


class SingularSystem(NsacError):
    """A tridiagonal system is not strictly diagonally dominant."""


class PreconditionFailed(NsacError):
    """A diagnostic's hypothesis does not hold for the given data."""


class InsufficientCadence(NsacError):
    """Snapshots are too sparse in time for the requested reconstruction."""


class ConfigError(NsacError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key, reason):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


class MissingArtifacts(NsacError):
    """A run directory lacks files required by a command."""


class SolverAbort(NsacError):
    """A time step could not be completed.

    ``step``, ``t`` and ``node`` locate the failure when known.
    """

    def __init__(self, message, step=None, t=None, node=None):
        super().__init__(message)
        self.message = message
        self.step = step
        self.t = t
        self.node = node

    def record(self):
        return {
            "error": type(self).__name__,
            "message": self.message,
            "step": self.step,
            "t": self.t,
            "node": self.node,
        }

    def __str__(self):
        where = []
        if self.step is not None:
            where.append(f"step {self.step}")
        if self.t is not None:
            where.append(f"t={self.t:.17g}")
        if self.node is not None:
            where.append(f"node {self.node}")
        return self.message + (f" ({', '.join(where)})" if where else "")


class CflViolation(SolverAbort):
    pass


class NonpositiveTemperature(SolverAbort):
    pass


class VolumeCutoff(SolverAbort):
    pass


class NoConvergence(SolverAbort):
    pass
