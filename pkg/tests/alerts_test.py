# type: ignore
"""Test alerts and logging."""
import re

import pytest
import typer

from capcover._utils import alerts
from capcover._utils.alerts import logger as log
from tests.helpers import Regex, strip_ansi


@pytest.mark.parametrize(
    ("alert", "prefix"),
    [
        (alerts.success, "SUCCESS  | "),
        (alerts.error, "ERROR    | "),
        (alerts.warning, "WARNING  | "),
    ],
)
def test_alerts(capsys, alert, prefix):
    """Test the alert functions.

    GIVEN a message
    WHEN an alert function is called
    THEN the message is printed to stdout behind its level prefix
    """
    alert("This prints")
    captured = strip_ansi(capsys.readouterr().out)
    assert captured == f"{prefix}This prints\n"


def test_alerts_keep_brackets(capsys):
    """Test alerts with square brackets in the message.

    GIVEN a message naming a configuration section such as [cover]
    WHEN it is printed as an error
    THEN the brackets are shown instead of being read as console markup
    """
    alerts.error("Section [cover] in 'x.toml' must be a table")
    captured = strip_ansi(capsys.readouterr().out)
    assert captured == "ERROR    | Section [cover] in 'x.toml' must be a table\n"


@pytest.mark.parametrize(
    ("verbosity", "level"),
    [(0, "WARNING"), (1, "INFO"), (2, "DEBUG"), (3, "TRACE"), (7, "TRACE")],
)
def test_levels(verbosity, level):
    """Test LoggerManager verbosity.

    GIVEN a verbosity count
    WHEN the logger manager is created
    THEN the stderr sink uses the matching level
    """
    assert alerts.LoggerManager(verbosity=verbosity).log_level == level


def test_stderr_sink(capsys):
    """Test logging to stderr.

    GIVEN verbosity 1
    WHEN logging at INFO and DEBUG
    THEN only the INFO message reaches stderr
    """
    alerts.LoggerManager(verbosity=1)
    log.info("This is Info logging")
    log.debug("This is Debug logging")
    captured = strip_ansi(capsys.readouterr().err)
    assert captured == "INFO     | This is Info logging\n"


def test_debug_location(capsys):
    """Test logging at DEBUG.

    GIVEN verbosity 2
    WHEN logging at DEBUG
    THEN the message names the module, function and line it came from
    """
    alerts.LoggerManager(verbosity=2)
    log.debug("This is Debug logging")
    captured = strip_ansi(capsys.readouterr().err)
    assert captured == Regex(r"^DEBUG    \| This is Debug logging \([\w\._:]+:\d+\)$", re.M)


@pytest.mark.parametrize(("verbosity", "log_to_file"), [(0, False), (2, True)])
def test_log_file(tmp_path, verbosity, log_to_file):
    """Test logging to a file.

    GIVEN a log file path
    WHEN log_to_file is set or unset
    THEN the file is written only when asked for
    """
    tmp_log = tmp_path / "tmp.log"
    alerts.LoggerManager(log_file=tmp_log, verbosity=verbosity, log_to_file=log_to_file)
    log.warning("This is Warning logging")

    if log_to_file:
        assert tmp_log.read_text() == Regex(
            r"^\d{4}-\d{2}-\d{2} \d+:\d+:\d+\.\d+ \| DEBUG    \| [\w\.:]+:\d+ \- Logging to file:",
            re.MULTILINE,
        )
    else:
        assert tmp_log.exists() is False


def test_log_file_missing():
    """Test logging to a file without a path.

    GIVEN log_to_file set
    WHEN no log file is given
    THEN a BadParameter error is raised
    """
    with pytest.raises(typer.BadParameter):
        alerts.LoggerManager(log_file=None, log_to_file=True)
