"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class MltermError(Exception):
    exit_code = 1


class InputError(MltermError):
    """Unreadable, missing, or malformed input data."""

    exit_code = 2


class CorpusFormatError(InputError):
    pass


class LabelError(InputError):
    pass


class EmptyCorpusError(InputError):
    pass


class AlignmentLengthError(InputError):
    pass


class TrainingDataError(InputError):
    pass


class EvaluationError(InputError):
    pass


class ModelFormatError(InputError):
    pass


class ConfigError(MltermError):
    exit_code = 3


class NumericalError(MltermError):
    exit_code = 4
