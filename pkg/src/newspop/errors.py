"""Error types shared across the toolkit.

The CLI maps DataError (and subclasses) to exit code 2; argparse usage
problems exit 1.
"""


class DataError(Exception):
    """Input data violates a contract (bad file, degenerate set, ...)."""


class FormatError(DataError):
    """A file is structurally unusable (wrong format, unreadable)."""
