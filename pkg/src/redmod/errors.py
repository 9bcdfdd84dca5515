"""
Exceptions raised by redmod.

Every domain error derives from `RedmodError`, itself a `ValueError`, so callers
that only care about bad input can keep catching `ValueError`. The command line
maps input errors and resource limits to 2 and internal errors to 3.
"""


class RedmodError(ValueError):
    """Root of all redmod errors."""

    exit_code = 1


class InputError(RedmodError):
    """The request, a file or an expression text is malformed."""

    exit_code = 2


class AnalysisError(RedmodError):
    """
    An analysis could not be carried out for the given objects.

    The analysis itself completed: the command line reports it as an error document
    and exits with 0.
    """

    exit_code = 0


class ResourceLimit(RedmodError):
    """An expression or a jet order grew past the configured cap."""

    exit_code = 2


class InternalError(RedmodError):
    """Two independent computations disagree; this is a bug."""

    exit_code = 3


class ExprSyntaxError(InputError):
    """Expression text does not follow the grammar."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    pass


class JetIndexLengthError(ExprSyntaxError):
    pass


class InvalidRequest(InputError):
    pass


class InvalidVectorField(InputError):
    pass


class LinearlyDependentBasis(InputError):
    pass


class SingularSubstitution(AnalysisError):
    pass


class RankDeficient(AnalysisError):
    pass


class NotInvolutive(AnalysisError):
    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)


class DegenerateInvariant(AnalysisError):
    pass


class MissingInverse(AnalysisError):
    pass


class ChangeOfJetCoordinatesFailed(InternalError):
    pass


class NotMetaSingular(AnalysisError):
    pass


class NotInReducedForm(AnalysisError):
    pass


class NotReductionModule(AnalysisError):
    pass


class LeadingSolveFailed(AnalysisError):
    pass


class SingularPhi(AnalysisError):
    pass


class NotSolvable(AnalysisError):
    pass


class NotEvolutionEquation(AnalysisError):
    pass


class PositivityCertificateMissing(AnalysisError):
    pass


class DegenerateJacobian(AnalysisError):
    pass


class EiconalViolated(AnalysisError):
    pass
