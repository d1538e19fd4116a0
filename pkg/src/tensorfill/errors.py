"""Exception types mapped to process exit codes by the command line front end."""


class TensorfillError(Exception):
    """Base class for all errors raised deliberately by this package."""

    exit_code = 1


class UsageError(TensorfillError):
    """Bad flag combinations or argument values that argparse cannot catch."""

    exit_code = 2


class InputError(TensorfillError):
    """Unreadable, malformed, or mutually inconsistent input artifacts."""

    exit_code = 3


class NumericError(TensorfillError):
    """Numerical failure: non-finite values or a linear algebra breakdown."""

    exit_code = 4
