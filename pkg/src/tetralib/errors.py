"""Exception hierarchy.

Every error carries a stable ``code`` string and the CLI exit status it maps
to, so command-line failures can be reported as machine-readable JSON.
"""


class TetraError(Exception):
    code = "TetraError"
    exit_status = 3

    def to_dict(self):
        return {"code": self.code, "message": str(self)}


class DomainError(TetraError):
    """Input lies outside the domain of an operation (exit status 2)."""

    code = "DomainError"
    exit_status = 2


class NumericalError(TetraError):
    """An iteration failed to produce a trustworthy value (exit status 3)."""

    code = "NumericalError"
    exit_status = 3


class BaseOutOfRange(DomainError):
    code = "BaseOutOfRange"


class OutsideDomain(DomainError):
    code = "OutsideDomain"


class DomainClipped(DomainError):
    code = "DomainClipped"


class OutOfStrip(DomainError):
    code = "OutOfStrip"


class AtFixedPoint(DomainError):
    code = "AtFixedPoint"


class BranchViolation(DomainError):
    code = "BranchViolation"


class MissingTable(DomainError):
    code = "MissingTable"


class UsageError(DomainError):
    code = "UsageError"


class NoConvergence(NumericalError):
    code = "NoConvergence"

    def __init__(self, message, final_update_norm=None):
        super().__init__(message)
        self.final_update_norm = final_update_norm


class BranchCollapse(NumericalError):
    code = "BranchCollapse"


class BasinEscape(NumericalError):
    code = "BasinEscape"


class DepthInsufficient(NumericalError):
    code = "DepthInsufficient"


class OverflowEscape(NumericalError):
    code = "OverflowEscape"


class Overflow(NumericalError):
    code = "Overflow"


class EvaluationFailure(NumericalError):
    code = "EvaluationFailure"
