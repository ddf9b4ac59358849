"""Exception hierarchy shared across the package."""


class GridconfError(Exception):
    """Base class for all package errors."""


class DatasetParseError(GridconfError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class ValidationError(GridconfError):
    """Network or configuration fails a structural invariant."""


class ConstraintError(GridconfError):
    """A configuration violates the traversal or radiality constraint."""

    def __init__(self, constraint, message=None):
        self.constraint = constraint
        super().__init__(message or f"configuration violates the {constraint} constraint")


class InvalidActionError(GridconfError):
    pass


class NumericHealthError(GridconfError):
    """Non-finite parameter or gradient in the Q-network."""

    def __init__(self, message, episode=None):
        self.episode = episode
        if episode is not None:
            message = f"episode {episode}: {message}"
        super().__init__(message)


class NotFoundError(GridconfError):
    pass
