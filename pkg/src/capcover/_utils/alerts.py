"""Logging and alerts."""
import sys
from enum import Enum
from pathlib import Path

import rich.repr
import typer
from loguru import logger
from rich.markup import escape

from capcover._utils.console import console


class VerboseLevel(Enum):
    """Enum for verbose levels."""

    WARN = 0
    INFO = 1
    DEBUG = 2
    TRACE = 3


_LEVEL_FOR_VERBOSITY = {
    VerboseLevel.WARN: "WARNING",
    VerboseLevel.INFO: "INFO",
    VerboseLevel.DEBUG: "DEBUG",
    VerboseLevel.TRACE: "TRACE",
}


def success(msg: str) -> None:
    """Print a success message without using logging.

    Args:
        msg: Message to print
    """
    console.print(f"[green]SUCCESS  | {escape(msg)}[/green]")


def warning(msg: str) -> None:
    """Print a warning message without using logging.

    Args:
        msg: Message to print
    """
    console.print(f"[yellow]WARNING  | {escape(msg)}[/yellow]")


def error(msg: str) -> None:
    """Print an error message without using logging.

    Args:
        msg: Message to print
    """
    console.print(f"[red]ERROR    | {escape(msg)}[/red]")


def _log_formatter(record: dict) -> str:
    """Create custom log formatter based on the log level. Only affects the stderr sink."""
    if record["level"].name in ("INFO", "SUCCESS", "WARNING"):
        return "<level><normal>{level: <8} | {message}</normal></level>\n{exception}"

    return "<level>{level: <8} | {message}</level> <fg #c5c5c5>({name}:{function}:{line})</fg #c5c5c5>\n{exception}"


@rich.repr.auto
class LoggerManager:
    """Instantiate the loguru logging system.

    Verbosity selects the stderr level: 0=WARNING, 1=INFO, 2=DEBUG, 3 or more=TRACE. Solver modules
    log their rotations, early exits and search steps at DEBUG and TRACE.

    Attributes:
        log_file (Path): Path to the log file.
        verbosity (int): Verbosity level.
        log_to_file (bool): Whether to log to a file.
        log_level (str): Name of the active stderr level.
    """

    def __init__(
        self,
        log_file: Path | None = None,
        verbosity: int = 0,
        log_to_file: bool = False,
    ) -> None:
        self.verbosity = verbosity
        self.log_to_file = log_to_file
        self.log_file = log_file

        if self.log_to_file and self.log_file is None:
            raise typer.BadParameter("No log file specified")

        level = VerboseLevel(min(max(verbosity, 0), VerboseLevel.TRACE.value))
        self.log_level = _LEVEL_FOR_VERBOSITY[level]

        logger.remove()
        logger.add(
            sys.stderr,
            level=self.log_level,
            format=_log_formatter,  # type: ignore[arg-type]
            backtrace=False,
            diagnose=True,
        )

        if self.log_to_file:
            logger.add(
                self.log_file,
                rotation="5 MB",
                level=self.log_level,
                backtrace=False,
                diagnose=True,
                delay=True,
            )
            logger.debug(f"Logging to file: {self.log_file}")

        logger.debug("Logging instantiated")

    def __rich_repr__(self) -> rich.repr.Result:  # pragma: no cover
        """Define rich representation of the logger configuration."""
        yield "log_level", self.log_level
        yield "log_file", self.log_file
        yield "log_to_file", self.log_to_file
