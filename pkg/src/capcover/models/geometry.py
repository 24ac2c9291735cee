"""Caps, constellations, inversion and the map from caps to hyperplane regions.

Every cap lives on the unit sphere of R^d. The solver inverts the sphere about the fixed center
c = (1, 0, ..., 0) with radius 1, which sends the sphere to the hyperplane x1 = 1/2 and each cap
to a ball (internal region) or the complement of an open ball (external region) inside that
hyperplane.
Regions drop the constant first coordinate: their centers have d - 1 entries.
"""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import rich.repr

from capcover._utils.alerts import logger as log
from capcover.models.exceptions import (
    CenterOnBoundaryError,
    DegenerateInputError,
    InvalidInstanceError,
    RotationExhaustedError,
)

Vector = npt.NDArray[np.float64]

DEFAULT_EPS = 1e-9
DEFAULT_CLEARANCE = 1e-3
UNIT_TOLERANCE = 1e-9


def unit(dim: int, index: int = 0) -> Vector:
    """Return the basis vector e_index of R^dim."""
    vector = np.zeros(dim)
    vector[index] = 1.0
    return vector


def scaled_tolerance(eps: float, *magnitudes: float) -> float:
    """Scale an absolute tolerance to the size of the quantities being compared.

    Args:
        eps (float): Base tolerance.
        *magnitudes (float): Magnitudes of the compared quantities.

    Returns:
        float: eps * max(1, |magnitudes|).
    """
    return eps * max(1.0, *(abs(m) for m in magnitudes))


@dataclass(frozen=True, eq=False)
class Cap:
    """A closed spherical cap {x : ||x|| = 1, (x, axis) >= threshold}.

    Attributes:
        axis: Unit vector of length d >= 2.
        threshold: Cosine of the angular radius, strictly inside (-1, 1).
    """

    axis: Vector
    threshold: float

    def __post_init__(self) -> None:
        """Validate and freeze the axis."""
        axis = np.array(self.axis, dtype=float)
        if axis.ndim != 1 or axis.size < 2:  # noqa: PLR2004
            raise InvalidInstanceError(f"Cap axis must be a vector of length >= 2, got {axis!r}")
        if abs(np.linalg.norm(axis) - 1.0) > UNIT_TOLERANCE:
            raise InvalidInstanceError(
                f"Cap axis must have unit length, got {np.linalg.norm(axis)}"
            )
        threshold = float(self.threshold)
        if not -1.0 < threshold < 1.0:
            raise InvalidInstanceError(f"Cap threshold must lie in (-1, 1), got {threshold}")
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "threshold", threshold)

    @property
    def dim(self) -> int:
        """Ambient dimension of the cap."""
        return self.axis.size

    def contains(self, point: Sequence[float] | Vector) -> bool:
        """Whether a point of the sphere lies in the closed cap."""
        return float(np.dot(self.axis, point)) >= self.threshold


@rich.repr.auto
class Constellation:
    """An ordered collection of n >= 1 caps in a common dimension d >= 2.

    Axes and thresholds are stored as read-only numpy arrays; `caps` materialises `Cap` objects.
    """

    def __init__(self, axes: npt.ArrayLike, thresholds: npt.ArrayLike) -> None:
        axes = np.array(axes, dtype=float, ndmin=2)
        thresholds = np.array(thresholds, dtype=float, ndmin=1)

        if axes.ndim != 2 or axes.shape[0] < 1:  # noqa: PLR2004
            raise InvalidInstanceError("A constellation needs at least one cap")
        if axes.shape[1] < 2:  # noqa: PLR2004
            raise InvalidInstanceError(f"Dimension must be at least 2, got {axes.shape[1]}")
        if thresholds.shape != (axes.shape[0],):
            raise InvalidInstanceError(
                f"Expected {axes.shape[0]} thresholds, got {thresholds.shape[0]}"
            )

        norms = np.linalg.norm(axes, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOLERANCE)
        if bad.size:
            raise InvalidInstanceError(f"Axis {bad[0]} is not a unit vector (norm {norms[bad[0]]})")
        bad = np.flatnonzero((thresholds <= -1.0) | (thresholds >= 1.0) | ~np.isfinite(thresholds))
        if bad.size:
            raise InvalidInstanceError(
                f"Threshold {bad[0]} must lie in (-1, 1), got {thresholds[bad[0]]}"
            )

        axes.setflags(write=False)
        thresholds.setflags(write=False)
        self.axes: Vector = axes
        self.thresholds: Vector = thresholds

    @classmethod
    def from_caps(cls, caps: Sequence[Cap]) -> "Constellation":
        """Build a constellation from a sequence of caps."""
        if not caps:
            raise InvalidInstanceError("A constellation needs at least one cap")
        return cls(np.stack([cap.axis for cap in caps]), [cap.threshold for cap in caps])

    @classmethod
    def uniform(cls, axes: npt.ArrayLike, threshold: float) -> "Constellation":
        """Build a constellation with the same threshold on every axis."""
        axes = np.array(axes, dtype=float, ndmin=2)
        return cls(axes, np.full(axes.shape[0], float(threshold)))

    def __rich_repr__(self) -> rich.repr.Result:  # pragma: no cover
        """Define rich representation of the constellation."""
        yield "dim", self.dim
        yield "size", len(self)

    def __len__(self) -> int:
        """Number of caps."""
        return self.axes.shape[0]

    def __iter__(self) -> Iterator[Cap]:
        """Iterate over the caps."""
        return iter(self.caps)

    def __getitem__(self, index: int) -> Cap:
        """Return cap `index`."""
        return Cap(self.axes[index], self.thresholds[index])

    @property
    def dim(self) -> int:
        """Ambient dimension d."""
        return self.axes.shape[1]

    @property
    def caps(self) -> tuple[Cap, ...]:
        """The caps as `Cap` objects."""
        return tuple(
            Cap(axis, theta) for axis, theta in zip(self.axes, self.thresholds, strict=True)
        )

    def with_thresholds(self, thresholds: npt.ArrayLike) -> "Constellation":
        """Return a copy with new thresholds and the same axes."""
        return Constellation(self.axes, thresholds)

    def enlarged(self, alpha: float) -> "Constellation":
        """Return the constellation with every threshold lowered by alpha."""
        return self.with_thresholds(self.thresholds - alpha)

    def appended(self, cap: Cap) -> "Constellation":
        """Return the constellation with one more cap at the end."""
        return Constellation(np.vstack([self.axes, cap.axis]), [*self.thresholds, cap.threshold])

    def transformed(self, matrix: npt.ArrayLike) -> "Constellation":
        """Apply one linear map to every axis; orthogonal maps keep the instance valid."""
        return Constellation(self.axes @ np.asarray(matrix, dtype=float).T, self.thresholds)

    def margin(self, point: Sequence[float] | Vector) -> float:
        """Return max_i((point, t_i) - θ_i); negative means the point is uncovered."""
        return float(np.max(self.axes @ np.asarray(point, dtype=float) - self.thresholds))


def invert(
    center: npt.ArrayLike, radius: float, x: npt.ArrayLike, eps: float = DEFAULT_EPS
) -> Vector:
    """Invert a point in the sphere of given center and radius.

    Args:
        center (ArrayLike): Center of inversion.
        radius (float): Radius of inversion.
        x (ArrayLike): Point to invert.
        eps (float, optional): Minimum admissible distance from the center.

    Returns:
        Vector: center + radius^2 (x - center) / ||x - center||^2.

    Raises:
        DegenerateInputError: If x lies within eps of the center.
    """
    center = np.asarray(center, dtype=float)
    offset = np.asarray(x, dtype=float) - center
    square = float(offset @ offset)
    if square <= eps * eps:
        raise DegenerateInputError(f"Point {x} is within {eps} of the inversion center")
    return center + (radius * radius / square) * offset


@dataclass(frozen=True, eq=False)
class PlaneRegion:
    """Image of a cap in the hyperplane x1 = 1/2.

    Attributes:
        center: Coordinates 2..d of the bounding sphere's center.
        radius: Radius of the bounding sphere.
        external: True for the closed exterior of the sphere, False for the closed ball.
    """

    center: Vector
    radius: float
    external: bool

    def __post_init__(self) -> None:
        """Validate the radius."""
        if not self.radius > DEFAULT_EPS * DEFAULT_EPS:
            raise InvalidInstanceError(f"Region radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", np.array(self.center, dtype=float, ndmin=1))

    def contains(self, point: npt.ArrayLike) -> bool:
        """Whether a hyperplane point (coordinates 2..d) lies in the closed region."""
        distance = float(np.linalg.norm(np.asarray(point, dtype=float) - self.center))
        return distance >= self.radius if self.external else distance <= self.radius


@dataclass(frozen=True, eq=False)
class RegionSet:
    """Images of every cap of a constellation, stored column-wise for vectorised work."""

    centers: Vector
    radii: Vector
    external: npt.NDArray[np.bool_]

    def __len__(self) -> int:
        """Number of regions."""
        return self.radii.size

    def __getitem__(self, index: int) -> PlaneRegion:
        """Return region `index`."""
        return PlaneRegion(
            self.centers[index], float(self.radii[index]), bool(self.external[index])
        )


def _images(axes: Vector, thresholds: Vector, eps: float) -> RegionSet:
    """Compute the hyperplane regions of caps given as arrays."""
    gap = thresholds - axes[:, 0]
    touching = np.flatnonzero(np.abs(gap) <= eps)
    if touching.size:
        raise CenterOnBoundaryError(
            f"The inversion center lies on the boundary of cap {touching[0]}; rotate first"
        )
    denominator = 2.0 * gap
    centers = axes[:, 1:] / denominator[:, None]
    radii = np.abs(np.sqrt(1.0 - thresholds**2) / denominator)
    return RegionSet(centers, radii, axes[:, 0] > thresholds)


def cap_image(cap: Cap, eps: float = DEFAULT_EPS) -> PlaneRegion:
    """Map a cap to its region in the hyperplane x1 = 1/2.

    Args:
        cap (Cap): The cap to map.
        eps (float, optional): Minimum admissible |θ - t_1|.

    Returns:
        PlaneRegion: External exactly when the inversion center lies inside the cap.

    Raises:
        CenterOnBoundaryError: If the inversion center is within eps of the cap boundary.
    """
    return _images(cap.axis[None, :], np.array([cap.threshold]), eps)[0]


def cap_images(cst: Constellation, eps: float = DEFAULT_EPS) -> RegionSet:
    """Map every cap of a constellation to its hyperplane region."""
    return _images(cst.axes, cst.thresholds, eps)


@dataclass(frozen=True, eq=False)
class Rotation:
    """A rotation by `angle` in the plane spanned by e1 and the unit vector `partner`.

    `partner` is orthogonal to e1.
    """

    angle: float
    partner: Vector

    def _turn(self, points: npt.ArrayLike, angle: float) -> Vector:
        points = np.asarray(points, dtype=float)
        rows = np.atleast_2d(points)
        along_e1 = rows[:, 0]
        along_partner = rows @ self.partner
        cos, sin = np.cos(angle), np.sin(angle)
        turned = rows + np.outer(along_partner * (cos - 1.0) + along_e1 * sin, self.partner)
        turned[:, 0] += along_e1 * (cos - 1.0) - along_partner * sin
        return turned if points.ndim == 2 else turned[0]  # noqa: PLR2004

    def apply(self, points: npt.ArrayLike) -> Vector:
        """Rotate a point or the rows of a matrix by +angle."""
        return self._turn(points, self.angle)

    def undo(self, points: npt.ArrayLike) -> Vector:
        """Rotate a point or the rows of a matrix by -angle."""
        return self._turn(points, -self.angle)


def unrotate(point: npt.ArrayLike, rotation: Rotation | None) -> Vector:
    """Undo one recorded rotation; `None` stands for a level that was not rotated."""
    if rotation is None:
        return np.asarray(point, dtype=float)
    if np.asarray(point).shape[-1] != rotation.partner.size:
        raise InvalidInstanceError("Point dimension does not match the rotation")
    return rotation.undo(point)


def _generic_partner(dim: int) -> Vector:
    """A fixed direction orthogonal to e1 with no rational relation between its entries."""
    partner = np.zeros(dim)
    partner[1:] = 1.0 / (np.arange(1, dim) + np.sqrt(2.0))
    return partner / np.linalg.norm(partner)


def _gaps(axes: Vector, thresholds: Vector) -> Vector:
    """|(c, t_i) - θ_i| for every cap."""
    return np.abs(axes[:, 0] - thresholds)


def rotate_clear(
    cst: Constellation,
    delta0: float = 0.01,
    shrink: float = 0.9,
    eps: float = DEFAULT_EPS,
    max_attempts: int = 200,
    clearance: float = DEFAULT_CLEARANCE,
) -> tuple[Constellation, Rotation | None]:
    """Rotate every axis so that the inversion center stays away from every cap boundary.

    A cap whose boundary passes close to the center inverts to a huge region, so nothing is done
    only when every gap |(c, t_i) - θ_i| already reaches `clearance`. Otherwise the angles
    ±delta0 * shrink^j (j < max_attempts) are scored by their smallest gap and the best one wins,
    unless the unrotated constellation scores higher. The rotation acts in the x1-x2 plane; when a
    cap has t_1 = t_2 = θ = 0 (within eps) that plane cannot move it and a fixed generic plane
    through e1 is used instead.

    Args:
        cst (Constellation): Input caps.
        delta0 (float, optional): Largest angle tried.
        shrink (float, optional): Angle factor between candidates, in (0, 1).
        eps (float, optional): Smallest gap accepted.
        max_attempts (int, optional): Candidate angles on each side of zero.
        clearance (float, optional): Gap that needs no rotation.

    Returns:
        tuple[Constellation, Rotation | None]: The cleared constellation and the rotation applied,
            or the input unchanged and None when no rotation improves it.

    Raises:
        InvalidInstanceError: If delta0 is not positive or shrink is outside (0, 1).
        RotationExhaustedError: If no candidate angle lifts every gap above eps.
    """
    if delta0 <= 0 or not 0 < shrink < 1:
        raise InvalidInstanceError("Rotation needs delta0 > 0 and shrink in (0, 1)")
    current = float(np.min(_gaps(cst.axes, cst.thresholds)))
    if current >= max(clearance, eps):
        return cst, None

    stuck = (
        (np.abs(cst.axes[:, 0]) <= eps)
        & (np.abs(cst.axes[:, 1]) <= eps)
        & (np.abs(cst.thresholds) <= eps)
    )
    generic = cst.dim > 2 and stuck.any()  # noqa: PLR2004
    partner = _generic_partner(cst.dim) if generic else unit(cst.dim, 1)

    steps = delta0 * shrink ** np.arange(max_attempts)
    angles = np.concatenate([steps, -steps])
    along_partner = cst.axes @ partner
    first = np.outer(np.cos(angles), cst.axes[:, 0]) - np.outer(np.sin(angles), along_partner)
    scores = np.min(np.abs(first - cst.thresholds[None, :]), axis=1)
    best = int(np.argmax(scores))

    if scores[best] <= current and current > eps:
        log.trace(f"dim {cst.dim}: no rotation beats gap {current:.3g}")
        return cst, None
    if scores[best] <= eps:
        raise RotationExhaustedError(
            f"No rotation among {angles.size} candidate angles clears the inversion center"
        )

    rotation = Rotation(float(angles[best]), partner)
    axes = rotation.apply(cst.axes)
    axes /= np.linalg.norm(axes, axis=1)[:, None]
    log.trace(
        f"Rotated dim {cst.dim} by {rotation.angle:.3g} rad, "
        f"gap {current:.3g} -> {scores[best]:.3g}"
    )
    return Constellation(axes, cst.thresholds), rotation


def find_antipodal_pair(
    axes: npt.ArrayLike, thresholds: npt.ArrayLike, eps: float = DEFAULT_EPS
) -> tuple[int, int] | None:
    """Find the first pair of constraints (t, θ), (-t, -θ).

    Such a pair confines the polytope {x : (x, t_i) <= θ_i} to a hyperplane and makes the two caps
    cover the whole sphere.

    Returns:
        tuple[int, int] | None: Zero-based indices (i, j), i < j, or None.
    """
    axes = np.asarray(axes, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    for i in range(axes.shape[0] - 1):
        hits = np.flatnonzero(
            (np.linalg.norm(axes[i + 1 :] + axes[i], axis=1) <= eps)
            & (np.abs(thresholds[i + 1 :] + thresholds[i]) <= eps)
        )
        if hits.size:
            return i, i + 1 + int(hits[0])
    return None


def is_degenerate(cst: Constellation, eps: float = DEFAULT_EPS) -> tuple[int, int] | None:
    """Return the first antipodal pair of caps with opposite thresholds, or None."""
    return find_antipodal_pair(cst.axes, cst.thresholds, eps)
