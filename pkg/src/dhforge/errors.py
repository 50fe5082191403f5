"""Exception hierarchy shared across the package."""


class DhforgeError(Exception):
    """Base class for all dhforge errors."""


class InputError(DhforgeError):
    """A source file, record or configuration value failed validation."""


class InfeasibleModelError(DhforgeError):
    """The model cannot be built or sized from the given data."""
