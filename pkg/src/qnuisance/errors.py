"""Exception hierarchy for the estimation toolkit.

Every domain error derives from QNuisanceError so callers (and the CLI)
can distinguish invalid input / infeasible computation from bugs.
"""


class QNuisanceError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(QNuisanceError):
    """Precondition violation on user-supplied data (CLI exit code 2)."""


class InfeasibleError(QNuisanceError):
    """The requested computation has no feasible answer (CLI exit code 3)."""


# --- linear algebra ---------------------------------------------------------

class NonHermitianInput(InvalidInputError):
    pass


class NotPsd(InvalidInputError):
    pass


class RankDeficientState(InvalidInputError):
    """State on the boundary of state space; the regular-model assumption fails."""


# --- models -----------------------------------------------------------------

class OutOfDomain(InvalidInputError):
    pass


class StepExitsDomain(InvalidInputError):
    """Finite-difference stencil leaves the parameter domain even after shrinking."""


class UnknownModel(InvalidInputError):
    pass


class BadFixedParameter(InvalidInputError):
    pass


class SingularJacobian(InvalidInputError):
    pass


# --- fisher -----------------------------------------------------------------

class SingularFisher(InfeasibleError):
    pass


class SingularNuisanceBlock(InfeasibleError):
    pass


class InvalidPovm(InvalidInputError):
    pass


# --- bounds -----------------------------------------------------------------

class ShapeMismatch(InvalidInputError):
    pass


class NonPositiveWeight(InvalidInputError):
    pass


class NuisanceVarianceTooSmall(InfeasibleError):
    """Assumed nuisance MSE at or below the quantum floor."""


class DeltaOutOfRange(InfeasibleError):
    pass


class NonConvergent(InfeasibleError):
    pass


class NotBlockDiagonal(InvalidInputError):
    """Bound requires pre-orthogonalized (block-diagonal) Fisher inputs."""


# --- povm -------------------------------------------------------------------

class RequiresSingleInterest(InvalidInputError):
    pass


class SingularNuisanceScores(InfeasibleError):
    """No locally unbiased estimator for the parameters of interest exists."""


class EmptyFeasibleSet(InfeasibleError):
    pass
