"""Utility functions."""
from collections.abc import Iterable
from typing import Any

import numpy as np
import typer

from capcover.__version__ import __version__
from capcover._utils.console import console


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a reproducible child seed from a base seed and integer keys.

    Args:
        seed (int): Base seed supplied by the user.
        *keys (int): Additional integers identifying the child stream (restart number, shard, ...).

    Returns:
        int: A 32-bit seed that depends only on the inputs.
    """
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def docstring_parameter(*sub: Any) -> Any:
    """Replace variables within docstrings.

    Args:
        sub (Any): Replacement variables

    Usage:
        @docstring_parameter("foo", "bar")
        def foo():
            '''This is a {0} docstring with {1} variables.'''
    """

    def dec(obj: Any) -> Any:
        """Format object."""
        obj.__doc__ = obj.__doc__.format(*sub)
        return obj

    return dec


def format_vector(values: Iterable[float], digits: int = 9) -> str:
    """Render a vector as a parenthesised, comma separated string.

    Args:
        values (Iterable[float]): Coordinates to render.
        digits (int, optional): Significant digits per coordinate. Defaults to 9.

    Returns:
        str: For example "(0.5, -0.25)".
    """
    return "(" + ", ".join(f"{float(v):.{digits}g}" for v in values) + ")"


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"{__package__.split('.')[0]}: v{__version__}")
        raise typer.Exit()
