"""Exception hierarchy shared by the whole pipeline.

Exit-code mapping lives in the CLI: DataError -> 2, RunnerError -> 3.
"""


class TestrankError(Exception):
    """Base class for all testrank failures."""


class DataError(TestrankError):
    """Malformed or inconsistent input data (files, ids, partitions)."""


class RunnerError(TestrankError):
    """The runner process could not be spawned or kept alive."""
