"""Monte Carlo search for uncovered points."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from capcover._utils.alerts import logger as log
from capcover.models.exceptions import InvalidInstanceError
from capcover.models.geometry import Constellation, Vector

SHARD_SIZE = 65_536
BATCH_SIZE = 8_192


@dataclass(frozen=True, eq=False)
class McVerdict:
    """Outcome of a Monte Carlo run.

    Attributes:
        no_counterexample: True when no sampled point was uncovered.
        witness: The first uncovered sample, if any.
        samples_used: Samples up to and including the witness, or all samples.
        seed: Seed of the run.
        uncovered_fraction: Share of uncovered samples when every sample was drawn.
    """

    no_counterexample: bool
    witness: Vector | None
    samples_used: int
    seed: int
    uncovered_fraction: float | None = None


def sample_sphere(dim: int, rng: np.random.Generator) -> Vector:
    """Draw one uniformly distributed point of the unit sphere in R^dim."""
    return sample_sphere_batch(dim, 1, rng)[0]


def sample_sphere_batch(dim: int, count: int, rng: np.random.Generator) -> Vector:
    """Draw `count` uniform points of the unit sphere as rows, by normalising Gaussian vectors."""
    if dim < 2:  # noqa: PLR2004
        raise InvalidInstanceError(f"Sphere dimension must be at least 2, got {dim}")
    points = rng.standard_normal((count, dim))
    norms = np.linalg.norm(points, axis=1)
    while np.any(norms == 0):  # pragma: no cover
        zero = norms == 0
        points[zero] = rng.standard_normal((int(zero.sum()), dim))
        norms = np.linalg.norm(points, axis=1)
    return points / norms[:, None]


def _run_shard(
    cst: Constellation, count: int, seed_seq: np.random.SeedSequence, stop_at_first: bool
) -> tuple[int | None, Vector | None, int]:
    """Sample one shard; return the first uncovered index and point plus the uncovered count."""
    rng = np.random.default_rng(seed_seq)
    first_index, first_point, uncovered = None, None, 0
    done = 0
    while done < count:
        size = min(BATCH_SIZE, count - done)
        points = sample_sphere_batch(cst.dim, size, rng)
        margins = np.max(points @ cst.axes.T - cst.thresholds, axis=1)
        hits = np.flatnonzero(margins < 0)
        if hits.size:
            if first_index is None:
                first_index, first_point = done + int(hits[0]), points[hits[0]]
            uncovered += hits.size
            if stop_at_first:
                break
        done += size
    return first_index, first_point, uncovered


def mc_verify(
    cst: Constellation,
    samples: int,
    seed: int,
    threads: int = 1,
    stop_at_first: bool = True,
) -> McVerdict:
    """Search for an uncovered point by uniform sampling.

    Samples are split into fixed shards whose generators are spawned from `seed`, so the verdict and
    witness do not depend on `threads`.

    Args:
        cst (Constellation): The caps.
        samples (int): Number of points to draw.
        seed (int): Seed of the run.
        threads (int, optional): Worker threads.
        stop_at_first (bool, optional): Stop at the first uncovered sample; when False every sample
            is drawn and the uncovered fraction is reported.

    Returns:
        McVerdict: The verdict, with the lowest-index uncovered sample as witness.
    """
    if samples < 1:
        raise InvalidInstanceError("samples must be at least 1")

    shard_count = -(-samples // SHARD_SIZE)
    sizes = [min(SHARD_SIZE, samples - k * SHARD_SIZE) for k in range(shard_count)]
    seeds = np.random.SeedSequence(seed).spawn(shard_count)
    workers = max(1, threads)

    uncovered, first = 0, None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for wave in range(0, shard_count, workers):
            shards = range(wave, min(wave + workers, shard_count))
            results = list(
                pool.map(lambda k: _run_shard(cst, sizes[k], seeds[k], stop_at_first), shards)
            )
            for k, (index, point, hits) in zip(shards, results, strict=True):
                uncovered += hits
                if index is None or first is not None:
                    continue
                first = (k * SHARD_SIZE + index + 1, point)
                if stop_at_first:
                    log.debug(f"Uncovered sample found after {first[0]} draws")
                    return McVerdict(False, point, first[0], seed)

    fraction = None if stop_at_first else uncovered / samples
    if first is None:
        return McVerdict(True, None, samples, seed, fraction)
    return McVerdict(False, first[1], samples, seed, fraction)
