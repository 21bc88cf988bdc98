"""Exception hierarchy shared by the pipeline stages.

The CLI maps each class to a process exit code.
"""


class DistreadError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class InputError(DistreadError):
    """Malformed or missing input (files, schemas, arguments)."""

    exit_code = 2


class EmptyAnalysisError(DistreadError):
    """Nothing left to analyze after filtering."""

    exit_code = 3


class DegenerateError(DistreadError):
    """A numerical computation has no meaningful answer (e.g. zero variance)."""

    exit_code = 4
