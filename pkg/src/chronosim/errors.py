"""Exception hierarchy shared by all chronosim modules."""


class ChronosimError(Exception):
    """Base class for every error raised by chronosim."""


class InvalidParameterError(ChronosimError, ValueError):
    pass


class DegenerateStateError(ChronosimError, ValueError):
    """A superposition cancelled to (numerically) zero norm."""


class ResolutionError(ChronosimError, ValueError):
    """A grid does not cover or resolve the state it is asked to represent."""


class UnsupportedSpectrumError(ChronosimError, ValueError):
    pass


class ShapeError(ChronosimError, ValueError):
    pass


class DomainError(ChronosimError, ValueError):
    pass


class UnsupportedOrderError(ChronosimError, ValueError):
    """Monomial powers outside the range handled by the symbolic reducer."""


class InvalidOperatorError(ChronosimError, ValueError):
    pass


class FitError(ChronosimError, RuntimeError):
    """Rate fit did not converge; ``best`` holds the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PNValidityWarning(UserWarning):
    """Post-Newtonian expansion evaluated outside its small-parameter regime."""
