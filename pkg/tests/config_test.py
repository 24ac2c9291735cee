# type: ignore
"""Tests for the configuration module."""

from pathlib import Path

import pytest
import typer

from capcover._config import Config, CoverConfig, QpConfig, RelaxDefaults
from capcover._utils import alerts
from tests.helpers import strip_ansi


def test_missing_file_uses_defaults(config_file) -> None:
    """Test loading a configuration file that does not exist.

    GIVEN a path with no file behind it
    WHEN the configuration is loaded
    THEN every section takes its built-in defaults and no file is created
    """
    config = Config(config_path=config_file)
    assert config.config == {}
    assert config.cover == CoverConfig()
    assert config.qp == QpConfig()
    assert config.relax == RelaxDefaults()
    assert config_file.exists() is False


def test_broken_config_file(capsys) -> None:
    """Test loading a broken config file."""
    with pytest.raises(typer.Exit):
        Config(config_path=Path("tests/fixtures/broken_config.toml"))
    captured = capsys.readouterr()
    assert "Could not parse" in captured.out


def test_values_are_coerced(capsys) -> None:
    """Test type coercion of configuration values.

    GIVEN a file with a quoted integer and an unknown key
    WHEN it is loaded
    THEN values take the declared types and the unknown key is reported
    """
    alerts.LoggerManager(verbosity=0)
    config = Config(config_path=Path("tests/fixtures/capcover_config.toml"))

    assert config.cover.eps == 1e-8
    assert config.cover.clearance == 1e-6
    assert config.cover.delta0 == CoverConfig().delta0
    assert config.qp.starts == 4
    assert config.qp.seed == 3
    assert config.relax.max_iter == 2000
    assert isinstance(config.relax.tol, float)

    captured = strip_ansi(capsys.readouterr().err)
    assert "Ignoring unknown key 'relax.colour'" in captured


def test_invalid_value(config_file, capsys) -> None:
    """Test a value that cannot be converted.

    GIVEN a threshold given as a word
    WHEN the configuration is loaded
    THEN the program stops and names the key
    """
    config_file.write_text('[cover]\neps = "tiny"\n')
    with pytest.raises(typer.Exit):
        Config(config_path=config_file)
    assert "Invalid value for 'cover.eps'" in capsys.readouterr().out


def test_section_not_a_table(config_file, capsys) -> None:
    """Test a section that is not a table.

    GIVEN a file where qp is a number
    WHEN the configuration is loaded
    THEN the program stops and the error names the section in brackets
    """
    config_file.write_text("qp = 3\n")
    with pytest.raises(typer.Exit):
        Config(config_path=config_file)
    assert "Section [qp] in" in strip_ansi(capsys.readouterr().out)


def test_write_default(config_file) -> None:
    """Test write_default() method.

    GIVEN no configuration file
    WHEN the defaults are written and loaded again
    THEN the loaded values equal the built-in defaults
    """
    config = Config(config_path=config_file)
    assert config.write_default() == config_file

    content = config_file.read_text()
    assert "[cover]" in content
    assert "max_alpha_steps = 200" in content

    reloaded = Config(config_path=config_file)
    assert reloaded.cover == CoverConfig()
    assert reloaded.qp == QpConfig()
    assert reloaded.relax == RelaxDefaults()
