"""Exception types raised by building_voi."""


class VoiError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(VoiError, ValueError):
    pass


class UnknownNameError(ConfigError, KeyError):
    """A problem, measurement, sweep or action name is not registered."""

    def __init__(self, kind, name, known):
        self.kind = kind
        self.name = name
        self.known = sorted(known)
        super().__init__(f'unknown {kind} {name!r}; registered: ' +
                         ', '.join(self.known))

    def __str__(self):
        return self.args[0]


class DistributionError(VoiError, ValueError):
    pass


class ProblemError(VoiError, ValueError):
    pass


class PosteriorError(VoiError, ValueError):
    pass


class SimulationError(VoiError, RuntimeError):
    pass


class UtilityEvaluationError(VoiError, RuntimeError):
    """Utility evaluation failed inside an estimator.

    Carries the action index and the index of the first offending sample.
    """

    def __init__(self, action, sample_index, cause):
        self.action = action
        self.sample_index = sample_index
        self.cause = cause
        super().__init__(f'utility evaluation failed for action {action} '
                         f'at sample {sample_index}: {cause}')
