"""Shared utilities."""

from capcover._utils import alerts
from capcover._utils.alerts import LoggerManager
from capcover._utils.utilities import (
    derive_seed,
    docstring_parameter,
    format_vector,
    version_callback,
)

__all__ = [
    "alerts",
    "derive_seed",
    "docstring_parameter",
    "format_vector",
    "LoggerManager",
    "version_callback",
]
