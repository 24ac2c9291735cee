"""Coverage of the real line by closed intervals and complements of open intervals."""

from collections.abc import Sequence
from dataclasses import dataclass

from capcover.models.exceptions import InvalidInstanceError
from capcover.models.geometry import DEFAULT_EPS, scaled_tolerance


@dataclass(frozen=True)
class LineRegion:
    """An internal region [c - r, c + r] or an external region ℝ minus (c - r, c + r)."""

    center: float
    radius: float
    external: bool

    def __post_init__(self) -> None:
        """Validate the radius."""
        if not self.radius > 0:
            raise InvalidInstanceError(f"Line region radius must be positive, got {self.radius}")

    @property
    def lower(self) -> float:
        """Left endpoint c - r."""
        return self.center - self.radius

    @property
    def upper(self) -> float:
        """Right endpoint c + r."""
        return self.center + self.radius

    def contains(self, x: float) -> bool:
        """Whether x lies in the closed region."""
        inside = self.lower <= x <= self.upper
        return not (self.lower < x < self.upper) if self.external else inside

    def interior_contains(self, x: float, eps: float = 0.0) -> bool:
        """Whether x lies in the interior of the region, shrunk by eps on every side."""
        if self.external:
            return x < self.lower - eps or x > self.upper + eps
        return self.lower + eps < x < self.upper - eps


@dataclass(frozen=True)
class LineVerdict:
    """Outcome of a line coverage check; `uncovered_coord` is set exactly when not covered."""

    covered: bool
    uncovered_coord: float | None = None


def cover_line(regions: Sequence[LineRegion], eps: float = DEFAULT_EPS) -> LineVerdict:
    """Decide whether the union of the regions is the whole real line.

    External regions leave only their common excluded interval (c', d') to fill; internal intervals
    are swept by left endpoint, extending the covered frontier from c'. When the sweep stalls, the
    frontier is an endpoint lying in no region's interior. Ties within eps count as covered.

    Args:
        regions (Sequence[LineRegion]): At least one region.
        eps (float, optional): Tolerance, scaled by the magnitude of the endpoints.

    Returns:
        LineVerdict: The covered flag and, when not covered, an uncovered coordinate.

    Raises:
        InvalidInstanceError: If no region is given.
    """
    if not regions:
        raise InvalidInstanceError("cover_line needs at least one region")

    tol = scaled_tolerance(eps, *(r.lower for r in regions), *(r.upper for r in regions))
    externals = [r for r in regions if r.external]
    internals = sorted((r for r in regions if not r.external), key=lambda r: r.lower)

    if not externals:
        return LineVerdict(covered=False, uncovered_coord=max(r.upper for r in regions) + 1.0)

    frontier = max(r.lower for r in externals)
    target = min(r.upper for r in externals)
    if frontier >= target - tol:
        return LineVerdict(covered=True)
    if not internals:
        return LineVerdict(covered=False, uncovered_coord=0.5 * (frontier + target))

    for region in internals:
        if region.lower > frontier + tol:
            return LineVerdict(covered=False, uncovered_coord=frontier)
        frontier = max(frontier, region.upper)
        if frontier >= target - tol:
            return LineVerdict(covered=True)

    return LineVerdict(covered=False, uncovered_coord=frontier)
