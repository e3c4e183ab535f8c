"""Exception types shared across the package."""


class SolarcastError(Exception):
    """Base class for all package errors."""


class ParseError(SolarcastError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StructuralError(SolarcastError):
    """Input data violates a structural requirement (row count, duplicates, spacing)."""


class ConfigError(SolarcastError):
    """Invalid configuration or column mapping."""


class UnavailableLagError(SolarcastError):
    """A forecast needs an observation that is missing or before the series start."""


class SeriesLengthError(SolarcastError):
    """Series too short for the requested differencing or fit."""


class ConvergenceError(SolarcastError):
    """Optimizer hit its iteration cap; ``best_model`` holds the best fit so far."""

    def __init__(self, message, best_model=None):
        super().__init__(message)
        self.best_model = best_model


class ConditioningError(SolarcastError):
    """Near-singular system; ``columns`` names the dependent design columns when known."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class EmptyDesignError(SolarcastError):
    """No usable rows for the requested design."""


class ShapeMismatchError(SolarcastError):
    """Input width does not match the model."""


class TrainingDivergedError(SolarcastError):
    """Training loss became non-finite; ``epoch`` reports when."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class EmptyEvaluationError(SolarcastError):
    """Metric computation received zero daytime hours."""


class MetricUndefinedError(SolarcastError):
    """A metric is undefined for this data (e.g. CVRMSE with zero mean observed)."""


class CoverageError(SolarcastError):
    """A split plan requires data the series does not cover."""


class SplitSizeError(SolarcastError):
    """Too few rows for the requested number of folds."""


class GridSearchError(SolarcastError):
    """Every candidate order in a grid search failed to fit."""
