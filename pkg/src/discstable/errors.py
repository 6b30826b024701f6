"""Exception hierarchy shared by all modules."""


class DiscStableError(Exception):
    """Base class for library errors."""


class DomainError(DiscStableError, ValueError):
    """A parameter or argument lies outside its admissible range."""


class FamilyMismatchError(DomainError):
    """Two objects that must share a family or fixed parameters do not."""


class DomainEscapeError(DomainError):
    """A composed generating function left the closed unit disc."""


class BranchError(DiscStableError, ArithmeticError):
    """A complex power was requested off the principal-branch domain."""


class ConvergenceError(DiscStableError, ArithmeticError):
    """A numerical refinement loop did not stabilise."""


class InstabilityError(DiscStableError, ArithmeticError):
    """A series evaluation would lose too much precision to cancellation."""


class SampleOverflowError(DiscStableError, OverflowError):
    """A sampled count exceeds the 64-bit integer range."""
