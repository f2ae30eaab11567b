"""Security audit toolkit for internet-connected children's toys."""

__version__ = "0.1.0"


class ToyAuditError(Exception):
    """Base class for all toolkit errors."""
