"""Exception hierarchy shared by all modules."""


class IFSError(Exception):
    """Base class for all library errors."""


class NotHyperbolic(IFSError):
    pass


class NotInjective(IFSError):
    pass


class BudgetExceeded(IFSError):
    pass


class DimensionMismatch(IFSError):
    pass


class EmptyWord(IFSError):
    pass


class LetterOutOfRange(IFSError):
    pass


class AlphabetMismatch(IFSError):
    pass


class NotUnitModulus(IFSError):
    pass


class DepthTooSmall(IFSError):
    pass


class OnBranchSet(IFSError):
    pass


class NoRadiusFound(IFSError):
    pass


class NotCographSeparated(IFSError):
    pass


class IllDefinedCographFunction(IFSError):
    """A cograph function takes different values on coinciding cograph points."""


class NotLeftInverse(IFSError):
    """Raised with the verification report attached as ``.report``."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SpecParseError(IFSError):
    pass
