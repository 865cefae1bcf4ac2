"""Exception types shared across the library.

Every error raised on bad *input* derives from ValidationError; budget
overruns derive from BudgetError so callers (and the CLI) can map them to
distinct exit codes.
"""


class FgelError(Exception):
    pass


class ValidationError(FgelError):
    pass


class BudgetError(FgelError):
    pass


class AxiomViolation(ValidationError):
    """Edge-matrix marginals disagree across generators, or an entry is negative."""


class NotNormalized(ValidationError):
    """An edge matrix does not sum to exactly 1."""


class ShapeMismatch(ValidationError):
    """Operands have different ranks or alphabets."""


class BudgetExceeded(BudgetError):
    """An exact enumeration would exceed the configured budget."""


class MarginalNotDenominatorN(ValidationError):
    """A prescribed marginal is not an exact denominator-n weight."""


class InfeasibleRepair(FgelError):
    """A nonnegativity repair step found no positive entry to draw from.

    The marginal identities guarantee this never happens; raising keeps any
    logic error loud instead of silently mis-rounding.
    """


class FrequencyMismatch(ValidationError):
    """Letter frequencies of a labeling disagree with a weight's vertex measure."""


class EmptyFiber(FgelError):
    """No homomorphism realizes the requested statistics."""


class RejectBudgetExceeded(BudgetError):
    """Rejection sampler exhausted its retry budget."""


class Inconsistent(FgelError):
    """A ball labeling is not the ball refinement of its root labeling."""

    def __init__(self, index, word):
        self.index = index
        self.word = word
        super().__init__(f"ball labeling inconsistent at element {index}, word {word!r}")


class NonIntegerResult(FgelError):
    """An exact integer count came out fractional; the input violates the weight axiom."""
