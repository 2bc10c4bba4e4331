"""Exception types mapped onto CLI exit codes."""


class SeqflowError(Exception):
    exit_code = 1


class ParseError(SeqflowError):
    exit_code = 1


class ValidationError(SeqflowError):
    exit_code = 2


class ResourceLimitError(SeqflowError):
    exit_code = 3


class UsageError(SeqflowError, ValueError):
    exit_code = 64


class InfeasibleFlow(SeqflowError):
    """Requested flow value exceeds what the pipeline can carry."""

    exit_code = 2
