"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ValidationError(ValueError):
    """A composite input (table, distribution, config) is malformed."""


class ParameterError(ValueError):
    """Approximation parameters are inconsistent with the problem size."""


class UnreachableTargetError(ValueError):
    """Requested accuracy cannot be reached with any finite training size."""

    def __init__(self, target: float, asymptote: float):
        self.target = target
        self.asymptote = asymptote
        super().__init__(f"target {target:g} is unreachable; asymptote {asymptote:g}")
