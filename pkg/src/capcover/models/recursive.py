"""Recursive decision procedure for cap coverage of the unit sphere.

The sphere is covered exactly when the hyperplane images of the caps cover the hyperplane and at
least one image is external (so the inversion center, which maps to infinity, is covered too). The
hyperplane is covered exactly when the bounding sphere of every region is covered by the other
regions. On each bounding sphere the other regions cut out caps of one dimension less, so the
question recurses until the line sweep of `cover_line` answers it.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from capcover._config import CoverConfig
from capcover._utils.alerts import logger as log
from capcover.models.enums import ExitKind, SubcapKind
from capcover.models.geometry import (
    Cap,
    Constellation,
    PlaneRegion,
    RegionSet,
    Rotation,
    Vector,
    cap_images,
    rotate_clear,
    unit,
)
from capcover.models.intervals import LineRegion, cover_line

_CODES = {
    SubcapKind.DISJOINT: 0,
    SubcapKind.COVERED: 1,
    SubcapKind.DUPLICATE: 2,
    SubcapKind.SUBCAP: 3,
}
_KINDS = {code: kind for kind, code in _CODES.items()}


@dataclass(frozen=True, eq=False)
class TraceLevel:
    """One recursion level traversed on the way to an uncovered point.

    Attributes:
        dim: Dimension m of the constellation at this level.
        index: Index of the region whose bounding sphere is not covered.
        center: Center of that sphere in hyperplane coordinates (length m - 1).
        radius: Radius of that sphere.
        rotation: Protective rotation applied at this level, if any.
    """

    dim: int
    index: int
    center: Vector
    radius: float
    rotation: Rotation | None = None


@dataclass(frozen=True, eq=False)
class WitnessTrace:
    """Everything needed to lift an uncovered boundary point back to the original sphere.

    Attributes:
        exit_kind: How the innermost level failed.
        exit_dim: Dimension of the vector the lift starts from.
        payload: Unit vector (antipode or whole-sphere exits) or line coordinate (line exit).
        exit_rotation: Rotation of the innermost level (center and line exits only).
        levels: Levels above the exit, innermost first; dimensions increase by one.
    """

    exit_kind: ExitKind
    exit_dim: int
    payload: Vector | float | None = None
    exit_rotation: Rotation | None = None
    levels: tuple[TraceLevel, ...] = ()

    def extended(self, level: TraceLevel) -> "WitnessTrace":
        """Return the trace with one more outer level."""
        return replace(self, levels=(*self.levels, level))

    @property
    def dim(self) -> int:
        """Dimension of the point the trace lifts to."""
        return self.levels[-1].dim if self.levels else self.exit_dim


@dataclass
class CoverStats:
    """Counters accumulated over one call of `cover`."""

    calls: int = 0
    max_depth: int = 0
    rotations: int = 0
    max_fanout: int = 0

    def as_dict(self) -> dict[str, int]:
        """Return the counters as a plain dictionary."""
        return {
            "calls": self.calls,
            "max_depth": self.max_depth,
            "rotations": self.rotations,
            "max_fanout": self.max_fanout,
        }


@dataclass(frozen=True, eq=False)
class Verdict:
    """Answer of a coverage check.

    Attributes:
        covered: Whether the caps cover the sphere.
        trace: Lifting trace, present when not covered and a witness was requested.
        stats: Solver counters.
        heuristic: True when the answer may be a false positive.
    """

    covered: bool
    trace: WitnessTrace | None = None
    stats: CoverStats = field(default_factory=CoverStats)
    heuristic: bool = False


@dataclass(frozen=True, eq=False)
class SubcapResult:
    """Relation of region j to the bounding sphere of region i; `cap` is set for SUBCAP."""

    kind: SubcapKind
    cap: Cap | None = None


@dataclass(frozen=True, eq=False)
class _Pairwise:
    kinds: np.ndarray
    axes: Vector
    thresholds: Vector
    same: np.ndarray
    flipped: np.ndarray


def _pairwise(regions: RegionSet, eps: float) -> _Pairwise:
    """Classify every region j against the bounding sphere of every region i.

    Entry [i, j] of the result describes how region j meets sphere i: it covers the whole sphere,
    misses it, duplicates it, or cuts a cap out of it. Cap axes and thresholds are expressed in the
    sphere's own directions u, the sphere being {center_i + radius_i * u : ||u|| = 1}.
    """
    centers, radii, external = regions.centers, regions.radii, regions.external
    n = radii.size

    offsets = centers[None, :, :] - centers[:, None, :]
    distance = np.linalg.norm(offsets, axis=2)
    r_i, r_j = radii[:, None], radii[None, :]
    tol = eps * np.maximum(1.0, np.maximum(r_i, r_j))

    concentric = distance <= tol
    same = concentric & (np.abs(r_i - r_j) <= tol)
    flipped = external[:, None] != external[None, :]
    inside = np.where(external[None, :], r_j <= r_i, r_j >= r_i)

    safe = np.where(concentric, 1.0, distance)
    sign = np.where(external, -1.0, 1.0)[None, :]
    cosine = ((r_i - r_j) * (r_i + r_j) + distance**2) / (2.0 * r_i * safe)
    thresholds = sign * cosine
    axes = sign[:, :, None] * offsets / safe[:, :, None]

    # a tangent cap is a single point of the sphere or all of it
    tangent = ~concentric & (np.abs(thresholds) >= 1.0 - eps)

    kinds = np.full((n, n), _CODES[SubcapKind.DISJOINT], dtype=np.int8)
    kinds[~concentric & ~tangent] = _CODES[SubcapKind.SUBCAP]
    kinds[tangent & (thresholds < 0)] = _CODES[SubcapKind.COVERED]
    kinds[concentric & ~same & inside] = _CODES[SubcapKind.COVERED]
    kinds[same & flipped] = _CODES[SubcapKind.COVERED]
    kinds[same & ~flipped] = _CODES[SubcapKind.DUPLICATE]
    np.fill_diagonal(kinds, _CODES[SubcapKind.DISJOINT])
    np.fill_diagonal(same, False)
    return _Pairwise(kinds, axes, thresholds, same, flipped)


def subcap(i: PlaneRegion, j: PlaneRegion, eps: float = 1e-9) -> SubcapResult:
    """Describe how region j meets the bounding sphere of region i.

    Args:
        i (PlaneRegion): Region whose bounding sphere is examined.
        j (PlaneRegion): The other region.
        eps (float, optional): Tolerance for identical, concentric and tangent spheres.

    Returns:
        SubcapResult: COVERED when j contains the whole sphere (or i and j together cover the
            hyperplane), DISJOINT when j misses it, DUPLICATE for an identical region, otherwise
            SUBCAP with the cap of sphere directions lying in j.
    """
    if i.center.size != j.center.size:
        raise ValueError("Regions must live in the same hyperplane")
    regions = RegionSet(
        np.vstack([i.center, j.center]),
        np.array([i.radius, j.radius]),
        np.array([i.external, j.external]),
    )
    table = _pairwise(regions, eps)
    kind = _KINDS[int(table.kinds[0, 1])]
    if kind is SubcapKind.SUBCAP:
        return SubcapResult(kind, Cap(table.axes[0, 1], table.thresholds[0, 1]))
    return SubcapResult(kind)


class _Solver:
    """Depth-first recursion sharing one configuration and one set of counters."""

    def __init__(self, cfg: CoverConfig) -> None:
        self.cfg = cfg
        self.stats = CoverStats()

    def solve(self, cst: Constellation, depth: int = 0) -> WitnessTrace | None:
        """Return None when `cst` covers its sphere, otherwise a trace to an uncovered point."""
        self.stats.calls += 1
        self.stats.max_depth = max(self.stats.max_depth, depth)

        if len(cst) == 1:
            log.trace(f"dim {cst.dim}: single cap left")
            return WitnessTrace(ExitKind.ANTIPODE, cst.dim, payload=-cst.axes[0])

        cst, rotation = rotate_clear(
            cst,
            delta0=self.cfg.delta0,
            shrink=self.cfg.rotation_shrink,
            eps=self.cfg.eps,
            max_attempts=self.cfg.max_rotations,
            clearance=self.cfg.clearance,
        )
        if rotation is not None:
            self.stats.rotations += 1

        regions = cap_images(cst, eps=self.cfg.eps)
        if not regions.external.any():
            log.trace(f"dim {cst.dim}: every region is bounded")
            return WitnessTrace(ExitKind.INVERSION_CENTER, cst.dim, exit_rotation=rotation)

        if cst.dim == 2:  # noqa: PLR2004
            line = cover_line(
                [
                    LineRegion(float(c), float(r), bool(e))
                    for c, r, e in zip(
                        regions.centers[:, 0], regions.radii, regions.external, strict=True
                    )
                ],
                eps=self.cfg.eps,
            )
            if line.covered:
                return None
            return WitnessTrace(
                ExitKind.LINE, 2, payload=line.uncovered_coord, exit_rotation=rotation
            )

        return self._spheres(cst.dim, regions, rotation, depth)

    def _spheres(
        self, dim: int, regions: RegionSet, rotation: Rotation | None, depth: int
    ) -> WitnessTrace | None:
        """Check the bounding sphere of every region against all other regions."""
        table = _pairwise(regions, self.cfg.eps)
        kinds = table.kinds
        covered_code, subcap_code = _CODES[SubcapKind.COVERED], _CODES[SubcapKind.SUBCAP]

        if np.any(table.same & table.flipped):
            log.trace(f"dim {dim}: complementary regions cover the hyperplane")
            return None
        dropped = np.any(np.triu(table.same, k=1), axis=0)
        active = np.flatnonzero(~dropped)

        fanout = 0
        try:
            for i in active:
                row = kinds[i, active]
                if np.any(row == covered_code):
                    continue

                members = active[row == subcap_code]
                level = TraceLevel(
                    dim, int(i), regions.centers[i].copy(), float(regions.radii[i]), rotation
                )
                if members.size == 0:
                    log.trace(f"dim {dim}: sphere {i} meets no other region")
                    return WitnessTrace(
                        ExitKind.WHOLE_SPHERE, dim - 1, payload=unit(dim - 1), levels=(level,)
                    )

                fanout += 1
                axes = table.axes[i, members]
                axes /= np.linalg.norm(axes, axis=1)[:, None]
                sub = Constellation(axes, table.thresholds[i, members])
                trace = self.solve(sub, depth + 1)
                if trace is not None:
                    return trace.extended(level)
        finally:
            self.stats.max_fanout = max(self.stats.max_fanout, fanout)

        return None


def cover(
    cst: Constellation, cfg: CoverConfig | None = None, want_witness: bool = True
) -> Verdict:
    """Decide whether the caps of a constellation cover the unit sphere.

    Args:
        cst (Constellation): The caps.
        cfg (CoverConfig, optional): Tolerances and rotation schedule.
        want_witness (bool, optional): Keep the lifting trace of a negative answer.

    Returns:
        Verdict: The answer, solver counters and, if requested, the trace for `lift_witness`.

    Raises:
        RotationExhaustedError: If a level cannot be rotated off the inversion center.
    """
    solver = _Solver(cfg or CoverConfig())
    trace = solver.solve(cst)
    log.debug(
        f"cover dim={cst.dim} n={len(cst)}: {'covered' if trace is None else 'not covered'} "
        f"({solver.stats.calls} calls, {solver.stats.rotations} rotations)"
    )
    return Verdict(
        covered=trace is None,
        trace=trace if want_witness else None,
        stats=solver.stats,
    )
