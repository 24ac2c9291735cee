"""Instantiate the configuration object."""

from dataclasses import dataclass, fields
from pathlib import Path
from textwrap import dedent
from typing import Any

import rich.repr
import tomlkit
import typer

from capcover._utils import alerts
from capcover._utils.alerts import logger as log


@dataclass(frozen=True)
class CoverConfig:
    """Tolerances and schedules for the recursive solver and witness search.

    Attributes:
        eps: Tolerance for every boundary comparison.
        clearance: Gap |(c, t_i) - θ_i| below which the solver looks for a better rotation.
        delta0: Largest rotation angle tried, in radians.
        rotation_shrink: Factor between successive candidate angles.
        max_rotations: Candidate angles on each side of zero.
        alpha0: First cap enlargement tried by the witness search.
        alpha_shrink: Factor applied to the enlargement after a covered attempt.
        max_alpha_steps: Enlargements tried before giving up.
    """

    eps: float = 1e-9
    clearance: float = 1e-3
    delta0: float = 0.01
    rotation_shrink: float = 0.9
    max_rotations: int = 200
    alpha0: float = 0.01
    alpha_shrink: float = 0.9
    max_alpha_steps: int = 200


@dataclass(frozen=True)
class QpConfig:
    """Settings for the quadratic programming side."""

    tol: float = 1e-10
    max_iter: int = 100_000
    starts: int = 16
    seed: int = 0


@dataclass(frozen=True)
class RelaxDefaults:
    """Defaults applied to every relaxation run.

    The `refine_*` and `jitter` settings apply to the covering refinement run by the bound search
    after each relaxation.
    """

    max_iter: int = 50_000
    tol: float = 1e-7
    step_scale: float = 0.1
    grow: float = 1.1
    shrink: float = 0.5
    refine_rounds: int = 300
    refine_step: float = 0.3
    jitter: float = 0.05


_SECTIONS: dict[str, type] = {"cover": CoverConfig, "qp": QpConfig, "relax": RelaxDefaults}


@rich.repr.auto
class Config:
    """Representation of a configuration file.

    A missing file is not an error: every value has a built-in default.
    """

    def __init__(self, config_path: Path | None = None) -> None:
        self.config_path: Path = (
            config_path or Path(Path.home() / f".{__package__.split('.')[0]}.toml")
        ).expanduser()
        self.config: dict[str, Any] = self._load_config() if self.config_path.exists() else {}

        self.cover: CoverConfig = self._section("cover")
        self.qp: QpConfig = self._section("qp")
        self.relax: RelaxDefaults = self._section("relax")

        log.debug(f"Loaded configuration from '{self.config_path}'")
        log.trace(self.config)

    def __rich_repr__(self) -> rich.repr.Result:  # pragma: no cover
        """Define rich representation of the Config object."""
        yield "config_path", self.config_path
        yield "cover", self.cover
        yield "qp", self.qp
        yield "relax", self.relax

    def _load_config(self) -> dict[str, Any]:
        """Load the configuration file."""
        try:
            with self.config_path.open(mode="rt", encoding="utf-8") as fp:
                return tomlkit.load(fp).unwrap()
        except tomlkit.exceptions.TOMLKitError as e:
            alerts.error(f"Could not parse '{self.config_path}'\n{e}")
            raise typer.Exit(code=2) from e

    def _section(self, name: str) -> Any:
        """Build the dataclass for one section, coercing values to the declared types."""
        cls = _SECTIONS[name]
        raw = self.config.get(name, {})
        if not isinstance(raw, dict):
            alerts.error(f"Section [{name}] in '{self.config_path}' must be a table")
            raise typer.Exit(code=2)

        known = {f.name: f for f in fields(cls)}
        values: dict[str, Any] = {}
        for key, value in raw.items():
            if key not in known:
                log.warning(f"Ignoring unknown key '{name}.{key}' in '{self.config_path}'")
                continue
            caster = int if isinstance(known[key].default, int) else float
            try:
                values[key] = caster(value)
            except (TypeError, ValueError) as e:
                alerts.error(f"Invalid value for '{name}.{key}' in '{self.config_path}': {value!r}")
                raise typer.Exit(code=2) from e

        return cls(**values)

    def write_default(self) -> Path:
        """Write a configuration file with every default value spelled out.

        Returns:
            Path: The path written.
        """
        cover, qp, relax = CoverConfig(), QpConfig(), RelaxDefaults()
        config_text = f"""\
        # Tolerances and schedules of the recursive solver
        [cover]
            eps             = {cover.eps}
            clearance       = {cover.clearance}
            delta0          = {cover.delta0}
            rotation_shrink = {cover.rotation_shrink}
            max_rotations   = {cover.max_rotations}
            alpha0          = {cover.alpha0}
            alpha_shrink    = {cover.alpha_shrink}
            max_alpha_steps = {cover.max_alpha_steps}

        # Quadratic programming heuristics
        [qp]
            tol      = {qp.tol}
            max_iter = {qp.max_iter}
            starts   = {qp.starts}
            seed     = {qp.seed}

        # Electrostatic relaxation used by `generate` and `bound`
        [relax]
            max_iter   = {relax.max_iter}
            tol        = {relax.tol}
            step_scale = {relax.step_scale}
            grow       = {relax.grow}
            shrink     = {relax.shrink}
            refine_rounds = {relax.refine_rounds}
            refine_step   = {relax.refine_step}
            jitter        = {relax.jitter}
        """
        self.config_path.write_text(dedent(config_text))
        return self.config_path
