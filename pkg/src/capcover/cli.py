"""capcover CLI."""

import json
import os
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import typer
from rich.table import Table

from capcover._config import Config
from capcover._utils import (
    LoggerManager,
    alerts,
    docstring_parameter,
    format_vector,
    version_callback,
)
from capcover._utils.console import console
from capcover.models.constellation import RelaxConfig, bound_search, four_d_85_text, relax
from capcover.models.enums import VerdictLabel
from capcover.models.exceptions import CapCoverError
from capcover.models.geometry import Constellation
from capcover.models.parsers import (
    format_constellation,
    parse_constellation,
    parse_graph,
    parse_qp,
    parse_theta,
)
from capcover.models.qp import brute_clique, clique_instance, cover_qp, qp_to_cover
from capcover.models.recursive import cover
from capcover.models.sampling import mc_verify
from capcover.models.witness import find_uncovered

app = typer.Typer(add_completion=False, no_args_is_help=True, rich_markup_mode="rich")

typer.rich_utils.STYLE_HELPTEXT = ""

HEURISTIC_BANNER = "HEURISTIC — false positives possible"


@contextmanager
def _reported_errors() -> Iterator[None]:
    """Turn library and I/O errors into an error alert and exit code 2."""
    try:
        yield
    except (CapCoverError, OSError) as e:
        alerts.error(str(e))
        raise typer.Exit(code=2) from e


def _config(ctx: typer.Context) -> Config:
    if isinstance(ctx.obj, Config):
        return ctx.obj
    return Config()  # pragma: no cover


def _read_constellation(path: Path, theta: str | None) -> Constellation:
    value = parse_theta(theta) if theta is not None else None
    return parse_constellation(path.read_text(encoding="utf-8"), value)


def _yes_no(answer: bool) -> str:
    return (VerdictLabel.YES if answer else VerdictLabel.NO).value


def _threads(threads: int | None) -> int:
    return threads if threads and threads > 0 else os.cpu_count() or 1


def _emit_json(
    verdict: Any,
    witness: Any = None,
    margin: float | None = None,
    stats: Any = None,
    seed: Any = None,
) -> None:
    """Print the single JSON object of --json mode."""
    if isinstance(witness, np.ndarray):
        witness = [float(x) for x in witness]
    payload = {
        "verdict": verdict,
        "witness": witness,
        "margin": margin,
        "stats": stats,
        "seed": seed,
    }
    typer.echo(json.dumps(payload, sort_keys=True))


def _stats_table(title: str, stats: dict[str, Any]) -> Table:
    table = Table(title=title, show_header=False, title_justify="left")
    for key, value in stats.items():
        table.add_row(key, str(value))
    return table


THETA_HELP = "Cap threshold for rows without one: a decimal or sqrtN/M, e.g. sqrt3/2"
JSON_HELP = "Print one JSON object with keys verdict, witness, margin, stats and seed"


@app.callback()
@docstring_parameter(__package__)
def main(
    ctx: typer.Context,
    config_file: Path = typer.Option(
        Path(Path.home() / f".{__package__}.toml"),
        help="Specify a custom path to a configuration file",
        show_default=False,
        dir_okay=False,
    ),
    log_file: Path = typer.Option(
        Path(Path.home() / "logs" / f"{__package__}.log"),
        help="Path to log file",
        show_default=True,
        dir_okay=False,
        file_okay=True,
        exists=False,
    ),
    log_to_file: bool = typer.Option(
        False,
        "--log-to-file",
        help="Log to file",
        show_default=True,
    ),
    verbosity: int = typer.Option(
        0,
        "-v",
        "--verbose",
        show_default=False,
        help="""Set verbosity level (0=WARN, 1=INFO, 2=DEBUG, 3=TRACE)""",
        count=True,
    ),
    version: Optional[bool] = typer.Option(  # noqa: ARG001
        None, "--version", help="Print version and exit", callback=version_callback, is_eager=True
    ),
) -> None:
    r"""Decide whether spherical caps cover the unit sphere, and find uncovered points when they do not.

    [bold underline]Constellation files:[/]
    One cap per line: the axis coordinates separated by commas or spaces, optionally followed by the cap's threshold. Lines starting with [tan]#[/] are comments and an optional [tan]dim d[/] header fixes the dimension. Rows without a threshold take the value of [tan]--theta[/].

    [bold underline]Configuration:[/]
    Tolerances and search schedules are read from [tan]~/.{0}.toml[/] when it exists. Run [tan]{0} config[/] to write a file with every default spelled out.

    [bold underline]Exit codes:[/]
    0 when covered (or YES), 1 when not covered (or NO), 2 on any error.
    """
    LoggerManager(log_file, verbosity, log_to_file)
    ctx.obj = Config(config_path=config_file)


@app.command()
def verify(
    ctx: typer.Context,
    file: Path = typer.Argument(..., exists=True, dir_okay=False, help="Constellation file"),
    theta: Optional[str] = typer.Option(None, "--theta", help=THETA_HELP),
    eps: Optional[float] = typer.Option(
        None, "--eps", help="Boundary tolerance", show_default=False
    ),
    witness: bool = typer.Option(False, "--witness", help="Find a certified uncovered point"),
    stats: bool = typer.Option(False, "--stats", help="Show solver counters"),
    json_output: bool = typer.Option(False, "--json", help=JSON_HELP),
) -> None:
    """Decide coverage exactly with the recursive algorithm."""
    config = _config(ctx)
    cover_cfg = config.cover if eps is None else replace(config.cover, eps=eps)

    with _reported_errors():
        cst = _read_constellation(file, theta)
        verdict = cover(cst, cover_cfg, want_witness=False)
        report = find_uncovered(cst, cfg=cover_cfg) if witness and not verdict.covered else None

    label = (VerdictLabel.COVERED if verdict.covered else VerdictLabel.NOT_COVERED).value
    counters: dict[str, Any] = verdict.stats.as_dict()
    if report is not None:
        counters |= {
            "alpha": report.alpha_used,
            "alpha_attempts": report.attempts,
            "clearance": report.clearance,
        }

    if json_output:
        _emit_json(
            label,
            witness=None if report is None else report.point,
            margin=None if report is None else report.margin,
            stats=counters,
        )
    else:
        typer.echo(label)
        if report is not None:
            console.print(f"witness {format_vector(report.point)}")
            console.print(f"margin  {report.margin:.9g}")
        if stats:
            console.print(_stats_table("cover", counters))

    raise typer.Exit(code=0 if verdict.covered else 1)


@app.command()
def mc(
    file: Path = typer.Argument(..., exists=True, dir_okay=False, help="Constellation file"),
    theta: Optional[str] = typer.Option(None, "--theta", help=THETA_HELP),
    samples: int = typer.Option(1_000_000, "--samples", min=1, help="Number of random points"),
    seed: int = typer.Option(0, "--seed", help="Random seed"),
    threads: Optional[int] = typer.Option(
        None, "--threads", help="Worker threads (default: all cores)", show_default=False
    ),
    all_samples: bool = typer.Option(
        False, "--all", help="Draw every sample and report the uncovered fraction"
    ),
    json_output: bool = typer.Option(False, "--json", help=JSON_HELP),
) -> None:
    """Search for an uncovered point by uniform sampling. A clean run proves nothing."""
    with _reported_errors():
        cst = _read_constellation(file, theta)
        result = mc_verify(
            cst, samples, seed, threads=_threads(threads), stop_at_first=not all_samples
        )

    label = (
        VerdictLabel.NO_COUNTEREXAMPLE if result.no_counterexample else VerdictLabel.NOT_COVERED
    ).value
    margin = None if result.witness is None else cst.margin(result.witness)
    counters = {
        "samples_used": result.samples_used,
        "uncovered_fraction": result.uncovered_fraction,
    }

    if json_output:
        _emit_json(label, witness=result.witness, margin=margin, stats=counters, seed=seed)
    else:
        typer.echo(label)
        if result.witness is not None:
            console.print(f"witness {format_vector(result.witness)}")
            console.print(f"margin  {margin:.9g}")
        console.print(_stats_table("monte carlo", counters))

    raise typer.Exit(code=0 if result.no_counterexample else 1)


@app.command()
def qp(
    ctx: typer.Context,
    file: Path = typer.Argument(..., exists=True, dir_okay=False, help="Constellation file"),
    theta: Optional[str] = typer.Option(None, "--theta", help=THETA_HELP),
    starts: Optional[int] = typer.Option(
        None, "--starts", min=1, help="Local ascent starts", show_default=False
    ),
    seed: Optional[int] = typer.Option(
        None, "--seed", help="Seed of the random starts", show_default=False
    ),
    json_output: bool = typer.Option(False, "--json", help=JSON_HELP),
) -> None:
    """Check coverage through quadratic programming. COVERED answers may be false positives."""
    config = _config(ctx)
    qp_cfg = config.qp
    if starts is not None:
        qp_cfg = replace(qp_cfg, starts=starts)
    if seed is not None:
        qp_cfg = replace(qp_cfg, seed=seed)

    with _reported_errors():
        cst = _read_constellation(file, theta)
        verdict = cover_qp(cst, qp_cfg, eps=config.cover.eps)

    label = (VerdictLabel.COVERED if verdict.covered else VerdictLabel.NOT_COVERED).value
    counters: dict[str, Any] = {"heuristic": True, "starts": qp_cfg.starts}
    if verdict.qp is not None:
        counters |= {
            "min_norm_sq": verdict.qp.m,
            "max_norm_sq": None if verdict.qp.unbounded else verdict.qp.m_hat,
            "unbounded": verdict.qp.unbounded,
        }

    if json_output:
        _emit_json(label, stats=counters, seed=qp_cfg.seed)
    else:
        typer.echo(label)
        if verdict.covered:
            console.print(f"[bold red]{HEURISTIC_BANNER}[/bold red]")
        console.print(_stats_table("quadratic programs", counters))

    raise typer.Exit(code=0 if verdict.covered else 1)


@app.command()
def generate(
    ctx: typer.Context,
    dim: int = typer.Option(..., "--dim", min=2, help="Dimension d"),
    count: int = typer.Option(..., "--count", min=2, help="Number of points n"),
    seed: int = typer.Option(0, "--seed", help="Random seed"),
    theta: Optional[str] = typer.Option(
        None, "--theta", help="Write this threshold after every axis", show_default=False
    ),
    out: Optional[Path] = typer.Option(
        None, "--out", dir_okay=False, help="Output file (default: stdout)", show_default=False
    ),
) -> None:
    """Generate a near-uniform constellation by electrostatic relaxation."""
    config = _config(ctx)
    with _reported_errors():
        value = parse_theta(theta) if theta is not None else 0.0
        result = relax(RelaxConfig.from_defaults(count, dim, seed, config.relax))
        text = format_constellation(
            Constellation.uniform(result.points, value), with_thresholds=theta is not None
        )
        if out is None:
            typer.echo(text, nl=False)
        else:
            out.write_text(text, encoding="utf-8")

    if not result.converged:
        alerts.warning(f"Relaxation stopped after {result.iterations} steps without converging")
    if out is not None:
        alerts.success(
            f"Wrote {count} points to '{out}' "
            f"(energy {result.initial_energy:.6g} -> {result.energy:.6g})"
        )


@app.command()
def bound(
    ctx: typer.Context,
    dim: int = typer.Option(..., "--dim", min=2, help="Dimension d"),
    theta: str = typer.Option("sqrt3/2", "--theta", help=THETA_HELP),
    restarts: int = typer.Option(50, "--restarts", min=1, help="Restarts per size"),
    seed: int = typer.Option(0, "--seed", help="Random seed"),
    nstart: int = typer.Option(..., "--nstart", min=2, help="Size to start the search from"),
    threads: Optional[int] = typer.Option(
        None, "--threads", help="Worker threads (default: all cores)", show_default=False
    ),
    out: Optional[Path] = typer.Option(
        None, "--out", dir_okay=False, help="Write the smallest covering constellation here"
    ),
    json_output: bool = typer.Option(False, "--json", help=JSON_HELP),
) -> None:
    """Search for the smallest covering constellation of equal caps, counting down from --nstart."""
    config = _config(ctx)
    with _reported_errors():
        result = bound_search(
            dim,
            parse_theta(theta),
            nstart,
            restarts,
            seed=seed,
            cover_cfg=config.cover,
            relax_defaults=config.relax,
            threads=_threads(threads),
        )
        if out is not None:
            out.write_text(format_constellation(result.constellation), encoding="utf-8")

    attempts = [
        {"n": a.count, "restarts": a.restarts, "covered": a.covered, "seeds": list(a.seeds)}
        for a in result.attempts
    ]
    if json_output:
        _emit_json(result.estimate, stats={"dim": dim, "attempts": attempts}, seed=seed)
        return

    table = Table(title=f"bound search d={dim}", title_justify="left")
    table.add_column("n", justify="right")
    table.add_column("restarts", justify="right")
    table.add_column("covered")
    for attempt in result.attempts:
        table.add_row(str(attempt.count), str(attempt.restarts), "yes" if attempt.covered else "no")
    console.print(table)
    typer.echo(f"M_u({dim}) <= {result.estimate}")


@app.command()
def qpreduce(
    ctx: typer.Context,
    qpfile: Optional[Path] = typer.Argument(
        None, exists=True, dir_okay=False, help="QP instance file", show_default=False
    ),
    clique: Optional[Path] = typer.Option(
        None, "--clique", exists=True, dir_okay=False, help="Graph file for a k-clique instance"
    ),
    k: Optional[int] = typer.Option(None, "--k", min=1, help="Clique size", show_default=False),
    check: bool = typer.Option(False, "--check", help="Cross-check cliques by brute force"),
    json_output: bool = typer.Option(False, "--json", help=JSON_HELP),
) -> None:
    """Answer "does {x : A x <= b} hold a point with ||x||^2 > c?" with the coverage solver."""
    config = _config(ctx)
    if (qpfile is None) == (clique is None):
        alerts.error("Give either a QP file or --clique GRAPH --k K")
        raise typer.Exit(code=2)
    if clique is not None and k is None:
        alerts.error("--clique needs --k")
        raise typer.Exit(code=2)

    with _reported_errors():
        if clique is not None:
            graph = parse_graph(clique.read_text(encoding="utf-8"))
            instance = clique_instance(graph, k)
        else:
            instance = parse_qp(qpfile.read_text(encoding="utf-8"))
        answer = qp_to_cover(instance, config.qp, config.cover)

    counters: dict[str, Any] = {"rows": int(instance.matrix.shape[0]), "dim": instance.dim}
    if check and clique is not None:
        counters["brute_force"] = _yes_no(brute_clique(graph, k))

    label = _yes_no(answer)
    if json_output:
        _emit_json(label, stats=counters)
    else:
        typer.echo(label)
        if "brute_force" in counters and counters["brute_force"] != label:
            alerts.warning(f"Brute force answers {counters['brute_force']}")

    raise typer.Exit(code=0 if answer else 1)


@app.command()
def builtin(
    out: Optional[Path] = typer.Option(
        None, "--out", dir_okay=False, help="Output file (default: stdout)", show_default=False
    ),
) -> None:
    """Write the embedded four_D_85 constellation (85 points in R^4, no thresholds)."""
    with _reported_errors():
        text = four_d_85_text()
        if out is None:
            typer.echo(text, nl=False)
            return
        out.write_text(text, encoding="utf-8")
    alerts.success(f"Wrote four_D_85 to '{out}'")


@app.command(name="config")
def write_config(
    ctx: typer.Context,
    force: bool = typer.Option(False, "--force", help="Overwrite an existing file"),
) -> None:
    """Write a configuration file holding every default value."""
    config = _config(ctx)
    if config.config_path.exists() and not force:
        alerts.error(f"'{config.config_path}' already exists. Use --force to overwrite it")
        raise typer.Exit(code=2)
    with _reported_errors():
        path = config.write_default()
    alerts.success(f"Wrote default configuration to '{path}'")


if __name__ == "__main__":
    app()
