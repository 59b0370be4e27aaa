"""
Exception hierarchy for graddens.
Domain failures, usage failures and I/O failures map to distinct exit statuses.
"""

__all__ = [
    'EXIT_OK', 'EXIT_DOMAIN', 'EXIT_USAGE', 'EXIT_IO',
    'GradDensError', 'DomainError', 'UsageError', 'ArtifactIOError',
    'InvalidDomainError', 'GridMismatchError', 'OutOfRangeError',
    'NormalizationError', 'TauTooLargeError', 'SpectralCoverageError',
    'ExcessImaginaryError', 'UnknownFunctionError', 'InvalidParamsError',
    'DomainMismatchError', 'TooFewSamplesError', 'DegenerateQueryError',
    'ScanTooCoarseError', 'EverywhereDegenerateError', 'IngestError',
    'exit_status_for',
]

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_IO = 3


class GradDensError(Exception):
    """Base class for all graddens errors."""

    exit_status = EXIT_DOMAIN


class DomainError(GradDensError):
    """The inputs are well-formed but the mathematics rejects them."""

    exit_status = EXIT_DOMAIN


class UsageError(GradDensError):
    """Bad flags, conflicting sources or violated call preconditions."""

    exit_status = EXIT_USAGE


class ArtifactIOError(OSError):
    """Reading or writing an artifact failed; the message names the path."""

    exit_status = EXIT_IO


class InvalidDomainError(DomainError):
    pass


class GridMismatchError(DomainError):
    pass


class OutOfRangeError(DomainError):
    pass


class NormalizationError(DomainError):
    pass


class TauTooLargeError(DomainError):
    pass


class SpectralCoverageError(DomainError):
    pass


class ExcessImaginaryError(DomainError):
    pass


class UnknownFunctionError(DomainError):
    pass


class InvalidParamsError(DomainError):
    pass


class DomainMismatchError(DomainError):
    pass


class TooFewSamplesError(DomainError):
    pass


class DegenerateQueryError(DomainError):
    pass


class ScanTooCoarseError(DomainError):
    pass


class EverywhereDegenerateError(DomainError):
    pass


class IngestError(DomainError):
    pass


def exit_status_for(exc: BaseException) -> int:
    """
    Map an exception to the CLI exit status.

    Args:
        exc: The exception raised by a command

    Returns:
        int: 1 for domain errors, 2 for usage errors, 3 for I/O errors
    """
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, GradDensError):
        return exc.exit_status
    return EXIT_DOMAIN
