"""Exception hierarchy shared by the numerical modules and the CLI."""


class LCSError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(LCSError, ValueError):
    """Operands live in incompatible Liouville spaces."""


class NumericalFailure(LCSError):
    """A computation diverged or could not be completed to tolerance."""


class PropagatorBlowUp(NumericalFailure):
    """The disentangling coefficients diverge (finite-time Riccati blow-up).

    Attributes:
        time: time at which the divergence was detected.
    """

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class StepSizeUnderflow(NumericalFailure):
    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class TruncationLeak(NumericalFailure):
    """Probability escaped past the Fock-space cutoff beyond tolerance."""


class ParameterSingularity(NumericalFailure):
    """A closed-form map hit a pole (resonance, Mobius singularity, ...)."""


class UnphysicalState(LCSError, ValueError):
    """A density matrix violates positivity, trace or Hermiticity."""
