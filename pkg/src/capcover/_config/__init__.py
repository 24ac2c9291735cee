"""Configuration for capcover."""

from capcover._config.config import Config, CoverConfig, QpConfig, RelaxDefaults

__all__ = ["Config", "CoverConfig", "QpConfig", "RelaxDefaults"]
