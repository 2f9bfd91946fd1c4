"""Exception hierarchy.

Exceptions are grouped by the CLI exit code they map to:

* ``PreconditionError``  -> exit code 2 (bad inputs / unmet preconditions)
* ``NumericalGuardError`` -> exit code 3 (resource or numerical guards tripped)
* ``VerificationFailure`` -> exit code 4 (a verified inequality failed)
"""


class MixlabError(Exception):
    exit_code = 1


class PreconditionError(MixlabError):
    exit_code = 2


class NumericalGuardError(MixlabError):
    exit_code = 3


class VerificationFailure(MixlabError):
    exit_code = 4


# --- chain validation -------------------------------------------------------

class NonStochasticRow(PreconditionError):
    pass


class NotIrreducible(PreconditionError):
    pass


class NotReversible(PreconditionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class ZeroStationaryMass(PreconditionError):
    pass


# --- numerical / resource guards -------------------------------------------

class DenseLimitExceeded(NumericalGuardError):
    pass


class HorizonExceeded(NumericalGuardError):
    """A distance scan reached its horizon without attaining the target."""


class HorizonCap(NumericalGuardError):
    """Hitting-time iteration stopped at the hard cap with residual mass."""


class EigenSolverFailure(NumericalGuardError):
    pass


class TooLargeForExact(NumericalGuardError):
    pass


class UnderflowGuard(NumericalGuardError):
    pass


class ExpanderSearchExhausted(NumericalGuardError):
    pass


class SizeOverflow(NumericalGuardError):
    pass


# --- structural preconditions ----------------------------------------------

class EmptyTargetSet(PreconditionError):
    pass


class TargetMismatch(PreconditionError):
    pass


class NotBirthDeath(PreconditionError):
    pass


class ComplexEigenvalue(NumericalGuardError):
    pass


class PreconditionFailed(PreconditionError):
    """A checkable hypothesis of a verifier failed; message names it."""


class OddDepth(PreconditionError):
    pass


class Disconnected(PreconditionError):
    pass


class NotLumpable(VerificationFailure):
    """Distance projection is not Markovian; signals a construction bug."""


class NoRoot(PreconditionError):
    pass
