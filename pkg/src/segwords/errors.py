"""Exception types shared across the toolkit."""


class SegwordsError(Exception):
    """Base class for toolkit errors."""


class InputError(SegwordsError):
    """Unreadable, malformed, or inconsistent input (file, config, header).

    The CLI maps this to exit code 2.
    """


class TrainingDivergedError(SegwordsError):
    """Training loss became non-finite. The CLI maps this to exit code 3."""
