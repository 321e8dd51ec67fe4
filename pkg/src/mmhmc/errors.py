"""Exception hierarchy shared across the toolkit."""


class MMHMCError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(MMHMCError, ValueError):
    """Arguments violate a documented precondition (shape, range, domain)."""


class EvaluationError(MMHMCError, ArithmeticError):
    """A model evaluation produced a non-finite value.

    Samplers treat this as a rejected proposal rather than a fatal error.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class CapabilityError(MMHMCError):
    """A derivative the caller needs is not provided by the model."""


class TrajectoryError(EvaluationError):
    """Model evaluation failed part-way through an integrated trajectory."""


class StencilError(MMHMCError):
    """A gradient stencil is incomplete for the requested shadow order."""


class DomainError(MMHMCError, ValueError):
    """A closed-form expression was evaluated outside its valid domain."""


class DegenerateWeightsError(MMHMCError, ValueError):
    """Importance weights carry no usable information (all zero or one atom)."""


class ConvergenceError(MMHMCError, RuntimeError):
    """An optimiser ran out of budget; ``best`` holds the best point found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(MMHMCError, ValueError):
    """Experiment configuration is malformed or fails validation."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line


class IngestionError(MMHMCError, ValueError):
    """An input dataset cannot be turned into a model."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column
