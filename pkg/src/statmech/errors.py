"""Exception hierarchy shared by all statmech modules."""


class StatMechError(Exception):
    """Base class for every error raised by the package."""


class DomainError(StatMechError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class NonConvergence(StatMechError, RuntimeError):
    """An iterative or adaptive method exhausted its evaluation budget."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NoBracket(StatMechError, ValueError):
    """The supplied interval does not bracket a sign change."""


class StepError(StatMechError, RuntimeError):
    """A stepping scheme produced non-finite values or noisy derivatives."""


class EmptyInput(StatMechError, ValueError):
    pass


class OverflowGuard(StatMechError, OverflowError):
    pass


class NoCondensation(StatMechError, ValueError):
    """Bose condensation requested for a density of states with alpha <= 1."""


class Infeasible(StatMechError, ValueError):
    """No value of the reaction coordinate keeps all particle counts >= 0."""


class StabilityError(StatMechError, ValueError):
    pass


class SingularRateMatrix(StatMechError, ValueError):
    """The rate matrix has a stationary space of dimension other than one."""

    def __init__(self, message, components=None):
        super().__init__(message)
        self.components = components


class DegeneracyError(StatMechError, ValueError):
    pass


class UnitarityError(StatMechError, ValueError):
    pass


class BranchError(StatMechError, RuntimeError):
    pass


class GridError(StatMechError, ValueError):
    pass


class SupportMismatch(StatMechError, ValueError):
    pass


class ConfigError(StatMechError, ValueError):
    """Invalid command-line or file configuration (CLI exit status 2)."""


class ComputeError(StatMechError, RuntimeError):
    """A numerical routine failed while serving a CLI request (exit status 3)."""


class PositivityWarning(UserWarning):
    """A propagated density matrix or a set of relaxation times left the physical region."""
