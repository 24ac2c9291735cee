"""Near-uniform constellations by electrostatic relaxation, and the search for small coverings.

Equal charges on the unit sphere repel each other with an inverse-square force. Moving every point
along the tangential part of its force and renormalising lowers the Coulomb energy until the points
settle into a near-uniform equilibrium.

An equilibrium of the energy is not the best covering. The bound search therefore refines each
relaxed configuration on its convex hull, whose facets are the holes of the covering.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from capcover._config import CoverConfig, RelaxDefaults
from capcover._utils.alerts import logger as log
from capcover._utils.utilities import derive_seed
from capcover.models.exceptions import InvalidInstanceError, NoCoveringFoundError
from capcover.models.geometry import Constellation, Vector
from capcover.models.parsers import parse_constellation
from capcover.models.recursive import cover

SQRT3_2 = math.sqrt(3.0) / 2.0
FOUR_D_85 = "four_D_85.txt"
STEP_COLLAPSE = 1e-3
ENERGY_SLACK = 1e-13


@dataclass(frozen=True)
class RelaxConfig:
    """Parameters of one relaxation run.

    Attributes:
        count: Number of points n.
        dim: Dimension d of the ambient space.
        seed: Seed of the random initial placement.
        max_iter: Iteration cap.
        tol: Stop once a step of the initial size would move no point farther than this.
        step_scale: Initial step is step_scale / n.
        grow: Step factor after an accepted step.
        shrink: Step factor after a rejected step.
    """

    count: int
    dim: int
    seed: int = 0
    max_iter: int = 50_000
    tol: float = 1e-7
    step_scale: float = 0.1
    grow: float = 1.1
    shrink: float = 0.5

    def __post_init__(self) -> None:
        """Validate sizes and step parameters."""
        if not self.count >= self.dim >= 2:  # noqa: PLR2004
            raise InvalidInstanceError(
                f"Need count >= dim >= 2, got count={self.count}, dim={self.dim}"
            )
        if not (self.tol > 0 and self.step_scale > 0 and self.max_iter > 0):
            raise InvalidInstanceError("tol, step_scale and max_iter must be positive")
        if not (self.grow >= 1.0 and 0.0 < self.shrink < 1.0):
            raise InvalidInstanceError("Need grow >= 1 and 0 < shrink < 1")

    @classmethod
    def from_defaults(
        cls, count: int, dim: int, seed: int, defaults: RelaxDefaults | None = None
    ) -> "RelaxConfig":
        """Build a run configuration from the [relax] settings."""
        defaults = defaults or RelaxDefaults()
        return cls(
            count=count,
            dim=dim,
            seed=seed,
            max_iter=defaults.max_iter,
            tol=defaults.tol,
            step_scale=defaults.step_scale,
            grow=defaults.grow,
            shrink=defaults.shrink,
        )


@dataclass(frozen=True, eq=False)
class RelaxResult:
    """Outcome of a relaxation run; `points` holds one unit vector per row."""

    points: Vector
    energy: float
    initial_energy: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class BoundAttempt:
    """Restarts tried at one constellation size.

    Attributes:
        count: Constellation size n.
        restarts: Restarts run, up to and including the first covering one.
        covered: Whether some restart covered the sphere.
        seeds: Relaxation seed of every restart run.
    """

    count: int
    restarts: int
    covered: bool
    seeds: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class BoundSearchResult:
    """Smallest covering size found for uniform caps of one threshold.

    Attributes:
        dim: Dimension d.
        theta: Common threshold of every cap.
        estimate: Smallest n with a covering constellation.
        constellation: The covering constellation of size `estimate`.
        attempts: One entry per size tried, largest first.
    """

    dim: int
    theta: float
    estimate: int
    constellation: Constellation
    attempts: tuple[BoundAttempt, ...] = field(default_factory=tuple)


def coulomb_energy(points: Vector) -> float:
    """Sum of 1 / ||x_i - x_j|| over all pairs of rows."""
    return float(np.sum(1.0 / pdist(points)))


def _tangent_forces(points: Vector) -> Vector:
    """Inverse-square repulsion on every point, projected onto the sphere's tangent space there."""
    offsets = points[:, None, :] - points[None, :, :]
    distance = np.linalg.norm(offsets, axis=2)
    np.fill_diagonal(distance, np.inf)
    forces = np.sum(offsets / distance[:, :, None] ** 3, axis=1)
    return forces - np.sum(forces * points, axis=1)[:, None] * points


def _normalised(points: Vector) -> Vector:
    return points / np.linalg.norm(points, axis=1)[:, None]


def relax(cfg: RelaxConfig) -> RelaxResult:
    """Spread `cfg.count` points over the unit sphere by minimising their Coulomb energy.

    Starts from seeded Gaussian directions. A step that raises the energy is rejected and the step
    shrinks; an accepted step lets it grow. The run converges when the largest displacement a step
    of the initial size would make drops below `cfg.tol`. A step that shrinks until it moves nothing
    ends the run unconverged.

    Args:
        cfg (RelaxConfig): Run parameters.

    Returns:
        RelaxResult: Best points found, with `converged` False when the iteration cap was hit or
            the step collapsed.
    """
    rng = np.random.default_rng(cfg.seed)
    points = _normalised(rng.standard_normal((cfg.count, cfg.dim)))
    energy = initial = coulomb_energy(points)
    scale = step = cfg.step_scale / cfg.count
    forces = _tangent_forces(points)

    for iteration in range(1, cfg.max_iter + 1):
        largest = float(np.max(np.linalg.norm(forces, axis=1)))
        if scale * largest < cfg.tol:
            log.trace(f"relax n={cfg.count} d={cfg.dim}: settled after {iteration - 1} steps")
            return RelaxResult(points, energy, initial, iteration - 1, converged=True)
        if step * largest < cfg.tol * STEP_COLLAPSE:
            log.debug(f"relax n={cfg.count} d={cfg.dim}: step collapsed at step {iteration - 1}")
            return RelaxResult(points, energy, initial, iteration - 1, converged=False)

        candidate = _normalised(points + step * forces)
        candidate_energy = coulomb_energy(candidate)
        if candidate_energy > energy * (1.0 + ENERGY_SLACK):
            step *= cfg.shrink
            continue

        points, energy = candidate, candidate_energy
        forces = _tangent_forces(points)
        step *= cfg.grow

    log.debug(f"relax n={cfg.count} d={cfg.dim}: no convergence within {cfg.max_iter} steps")
    return RelaxResult(points, energy, initial, cfg.max_iter, converged=False)


def covering_cosine(points: Vector) -> float:
    """Cosine of the covering radius of unit vectors spanning their space.

    Every facet of the convex hull is a hole of the covering: its outward normal is the point of the
    sphere farthest from the facet's vertices, at angular distance arccos of the facet's offset.

    Args:
        points (Vector): Unit vectors, one per row.

    Returns:
        float: The smallest facet offset, or -1.0 when the hull is flat.
    """
    try:
        hull = ConvexHull(points)
    except QhullError:
        return -1.0
    return float(np.min(-hull.equations[:, -1]))


def refine_covering(
    points: Vector, rounds: int, step: float, jitter: float = 0.0, seed: int = 0
) -> Vector:
    """Shrink the covering radius of a point set by pulling points into their deepest holes.

    Each round every hull vertex moves toward the outward normal of its worst incident facet, by a
    rate that decays linearly over the rounds and favours the points around the deepest holes. The
    seeded `jitter` displaces the points once before the first round, so restarts from one relaxed
    configuration explore different local optima.

    Args:
        points (Vector): Unit vectors, one per row.
        rounds (int): Number of rounds.
        step (float): Initial rate.
        jitter (float, optional): Standard deviation of the initial displacement.
        seed (int, optional): Seed of the displacement.

    Returns:
        Vector: The configuration with the largest covering cosine seen, `points` included.
    """
    best, best_cosine = points, covering_cosine(points)
    current = points
    if jitter > 0:
        rng = np.random.default_rng(seed)
        current = _normalised(points + jitter * rng.standard_normal(points.shape))

    for round_ in range(rounds):
        try:
            hull = ConvexHull(current)
        except QhullError:
            break
        offsets = -hull.equations[:, -1]
        cosine = float(offsets.min())
        if cosine > best_cosine:
            best, best_cosine = current, cosine

        # worst incident facet of each vertex
        vertex = hull.simplices.ravel()
        facet = np.repeat(np.arange(len(offsets)), hull.simplices.shape[1])
        order = np.lexsort((offsets[facet], vertex))
        vertices, first = np.unique(vertex[order], return_index=True)
        worst = facet[order][first]

        weight = ((1.0 - offsets[worst]) / (1.0 - cosine)) ** 4
        rate = step * (1.0 - round_ / rounds) * weight
        moved = current.copy()
        moved[vertices] += rate[:, None] * (hull.equations[worst, :-1] - current[vertices])
        current = _normalised(moved)

    return best


def _covering(
    dim: int, count: int, theta: float, seed: int, cover_cfg: CoverConfig, defaults: RelaxDefaults
) -> Constellation | None:
    """Relax and refine one constellation and return it when its uniform caps cover the sphere."""
    result = relax(RelaxConfig.from_defaults(count, dim, seed, defaults))
    points = refine_covering(
        result.points, defaults.refine_rounds, defaults.refine_step, defaults.jitter, seed
    )
    cst = Constellation.uniform(points, theta)
    return cst if cover(cst, cover_cfg, want_witness=False).covered else None


def bound_search(  # noqa: PLR0913
    dim: int,
    theta: float,
    n_start: int,
    restarts_per_n: int,
    seed: int = 0,
    cover_cfg: CoverConfig | None = None,
    relax_defaults: RelaxDefaults | None = None,
    threads: int = 1,
) -> BoundSearchResult:
    """Search downwards from `n_start` for the smallest size of a covering constellation.

    At each size up to `restarts_per_n` constellations are relaxed, refined with `refine_covering`
    and checked with `cover`. A covering lets the search continue at n - 1; the first size where
    every restart fails ends it. Restart seeds derive from (seed, n, restart), and restarts run in
    waves of `threads`, keeping the lowest covering restart, so the result does not depend on
    `threads`.

    Args:
        dim (int): Dimension d.
        theta (float): Common cap threshold.
        n_start (int): Size to start from.
        restarts_per_n (int): Restarts per size.
        seed (int, optional): Base seed.
        cover_cfg (CoverConfig, optional): Solver configuration.
        relax_defaults (RelaxDefaults, optional): Relaxation settings.
        threads (int, optional): Restarts relaxed concurrently.

    Returns:
        BoundSearchResult: The estimate, its covering constellation and the attempt log.

    Raises:
        NoCoveringFoundError: If no restart at `n_start` covers the sphere.
    """
    if restarts_per_n < 1:
        raise InvalidInstanceError("restarts_per_n must be at least 1")
    if n_start < dim:
        raise InvalidInstanceError(f"n_start must be at least the dimension {dim}")
    cover_cfg = cover_cfg or CoverConfig()
    relax_defaults = relax_defaults or RelaxDefaults()
    workers = max(1, threads)

    attempts: list[BoundAttempt] = []
    best: Constellation | None = None

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for count in range(n_start, dim - 1, -1):
            seeds = [derive_seed(seed, count, restart) for restart in range(restarts_per_n)]
            found: tuple[int, Constellation] | None = None
            for wave in range(0, restarts_per_n, workers):
                batch = seeds[wave : wave + workers]
                results = list(
                    pool.map(
                        lambda s, n=count: _covering(dim, n, theta, s, cover_cfg, relax_defaults),
                        batch,
                    )
                )
                hit = next((k for k, cst in enumerate(results) if cst is not None), None)
                if hit is not None:
                    found = (wave + hit, results[hit])
                    break

            tried = restarts_per_n if found is None else found[0] + 1
            attempts.append(BoundAttempt(count, tried, found is not None, tuple(seeds[:tried])))
            log.debug(
                f"bound d={dim} n={count}: "
                f"{'covered' if found else 'not covered'} after {tried} restarts"
            )
            if found is None:
                break
            best = found[1]

    if best is None:
        raise NoCoveringFoundError(
            f"No covering constellation of size {n_start} found in {restarts_per_n} restarts"
        )
    return BoundSearchResult(dim, theta, len(best), best, tuple(attempts))


def four_d_85_text() -> str:
    """Return the embedded four_D_85 data file."""
    return resources.files("capcover.data").joinpath(FOUR_D_85).read_text(encoding="utf-8")


def builtin_four_d_85(theta: float = SQRT3_2) -> Constellation:
    """The embedded 85-point constellation in R^4 with every threshold set to `theta`."""
    return parse_constellation(four_d_85_text(), theta)
