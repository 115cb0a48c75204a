"""Exception hierarchy shared across the package."""


class HGLFRError(Exception):
    """Base class for all errors raised by hglfr."""


class ValidationError(HGLFRError, ValueError):
    """Input data is malformed or inconsistent."""


class SelfLoopError(ValidationError):
    """An edge list contained a pair with identical endpoints."""


class ParameterError(HGLFRError, ValueError):
    """Generator or hierarchy parameters are infeasible."""


class GenerationError(HGLFRError, RuntimeError):
    """A stochastic generation step failed to produce a valid result."""


class UndefinedInputError(ValidationError):
    """A quantity is undefined for the given input (e.g. a graph with no edges)."""


class DegenerateCommunityError(UndefinedInputError):
    """A community has zero total degree."""


class UndefinedWindowError(UndefinedInputError):
    """The resolution window needs at least two communities."""


class ConfigError(HGLFRError, ValueError):
    """A run configuration field is missing or invalid."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
