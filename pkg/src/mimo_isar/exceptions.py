"""Exception and warning types raised across the toolkit."""


class ParameterError(ValueError):
    """Radar parameters are missing, non-physical or mutually inconsistent."""


class SceneError(ValueError):
    """Scene or trajectory definition is invalid, or queried outside its domain."""


class DegenerateInputError(ValueError):
    """Input carries no usable signal (e.g. an all-zero matrix)."""


class ConfigError(ValueError):
    """Scenario configuration could not be parsed or validated.

    Parameters
    ----------
    message : str
        Human readable description.
    key : str, optional
        Offending ``section.key``.
    line : int, optional
        1-based line number in the configuration text.
    """

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class CubeFormatError(ValueError):
    """Cube file is malformed, truncated or does not match expectations."""


class DegenerateMetricWarning(RuntimeWarning):
    """A metric hit an edge case (zero variance, no target) and returned a sentinel."""


class MocompWarning(RuntimeWarning):
    """Motion compensation fell back to a reduced or pass-through behaviour."""


class StageError(RuntimeError):
    """Failure inside one pipeline stage; the original exception is ``__cause__``."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


class ParameterWarning(UserWarning):
    """A derived radar quantity disagrees with a declared expectation."""
