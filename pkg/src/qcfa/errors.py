"""Shared exception types."""


class CapExceeded(RuntimeError):
    """A configurable resource cap was hit; the message names the bound."""
