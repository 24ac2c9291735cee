"""Certified uncovered points.

A negative answer of `cover` ends at a boundary point of some cap. Lowering every threshold by a
small alpha before solving makes that boundary point lie at positive distance from every original
cap, so lifting it back through the recorded levels yields a point that is strictly uncovered.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from capcover._config import CoverConfig
from capcover._utils.alerts import logger as log
from capcover.models.enums import ExitKind
from capcover.models.exceptions import AlphaExhaustedError, MalformedTraceError
from capcover.models.geometry import Constellation, Vector, invert, unit, unrotate
from capcover.models.recursive import WitnessTrace, cover

SPHERE_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class WitnessReport:
    """A certified uncovered point.

    Attributes:
        point: Unit vector with (point, t_i) < θ_i for every cap.
        margin: max_i((point, t_i) - θ_i), always negative.
        alpha_used: Enlargement of the problem the point was lifted from.
        attempts: Number of enlargements tried.
        clearance: Guaranteed chord distance from the point to every original cap.
    """

    point: Vector
    margin: float
    alpha_used: float
    attempts: int
    clearance: float


def separation_bound(thresholds: npt.ArrayLike, alpha: float) -> float:
    """Chord distance between the boundaries of the caps θ and θ - α, minimised over the caps.

    A point outside every enlarged cap is at least this far from every original cap.
    """
    thresholds = np.asarray(thresholds, dtype=float)
    widened = np.arccos(np.clip(thresholds - alpha, -1.0, 1.0)) - np.arccos(thresholds)
    return float(np.min(2.0 * np.sin(widened / 2.0)))


def _embed(center: Vector, radius: float, direction: Vector) -> Vector:
    """Place a sphere direction in the hyperplane x1 = 1/2 and invert it onto the unit sphere."""
    plane_point = np.concatenate(([0.5], center + radius * direction))
    return invert(unit(plane_point.size), 1.0, plane_point)


def lift_witness(trace: WitnessTrace) -> Vector:
    """Replay a trace from its exit outwards and return a point on the original sphere.

    Args:
        trace (WitnessTrace): Trace of a negative `cover` verdict.

    Returns:
        Vector: Unit vector in the dimension of the original constellation, lying in no cap's
            interior.

    Raises:
        MalformedTraceError: If the payload or the level dimensions do not chain.
    """
    match trace.exit_kind:
        case ExitKind.ANTIPODE | ExitKind.WHOLE_SPHERE:
            point = np.asarray(trace.payload, dtype=float)
            if point.shape != (trace.exit_dim,):
                raise MalformedTraceError(f"Payload does not have length {trace.exit_dim}")
        case ExitKind.INVERSION_CENTER:
            point = unit(trace.exit_dim)
        case ExitKind.LINE:
            if trace.exit_dim != 2 or trace.payload is None:  # noqa: PLR2004
                raise MalformedTraceError("A line exit needs a coordinate in dimension 2")
            point = invert(unit(2), 1.0, np.array([0.5, float(trace.payload)]))
        case _:  # pragma: no cover
            raise MalformedTraceError(f"Unknown exit kind {trace.exit_kind}")

    point = unrotate(point, trace.exit_rotation)

    for level in trace.levels:
        if level.dim != point.size + 1 or level.center.size != point.size:
            raise MalformedTraceError(
                f"Level of dimension {level.dim} cannot follow a point of dimension {point.size}"
            )
        point = unrotate(_embed(level.center, level.radius, point), level.rotation)

    return point


def verify_witness(cst: Constellation, point: npt.ArrayLike) -> tuple[bool, float]:
    """Check that a point lies on the sphere and outside every cap.

    Args:
        cst (Constellation): The caps.
        point (ArrayLike): Candidate of length cst.dim.

    Returns:
        tuple[bool, float]: Validity and max_i((point, t_i) - θ_i).
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (cst.dim,):
        raise ValueError(f"Point must have length {cst.dim}")
    margin = cst.margin(point)
    on_sphere = abs(float(np.linalg.norm(point)) - 1.0) <= SPHERE_TOLERANCE
    return bool(on_sphere and margin < 0), margin


def find_uncovered(
    cst: Constellation,
    alpha0: float | None = None,
    shrink: float | None = None,
    cfg: CoverConfig | None = None,
) -> WitnessReport | None:
    """Find a strictly uncovered point, or None when the caps cover the sphere.

    Tries enlargements alpha0, alpha0 * shrink, ... and lifts the first negative answer. An
    enlargement that would push a threshold to -1 is skipped.

    Args:
        cst (Constellation): The caps.
        alpha0 (float, optional): First enlargement; defaults to `cfg.alpha0`.
        shrink (float, optional): Enlargement factor; defaults to `cfg.alpha_shrink`.
        cfg (CoverConfig, optional): Solver configuration.

    Returns:
        WitnessReport | None: The certified point, or None if covered.

    Raises:
        AlphaExhaustedError: If every enlargement tried is covered.
    """
    cfg = cfg or CoverConfig()
    alpha = cfg.alpha0 if alpha0 is None else alpha0
    shrink = cfg.alpha_shrink if shrink is None else shrink

    if cover(cst, cfg, want_witness=False).covered:
        return None

    floor = float(np.min(cst.thresholds))
    for attempt in range(1, cfg.max_alpha_steps + 1):
        if floor - alpha > -1.0 + cfg.eps:
            verdict = cover(cst.enlarged(alpha), cfg, want_witness=True)
            if not verdict.covered:
                point = lift_witness(verdict.trace)
                valid, margin = verify_witness(cst, point)
                if valid:
                    log.debug(f"Uncovered point found with alpha={alpha:.3g} after {attempt} tries")
                    return WitnessReport(
                        point=point,
                        margin=margin,
                        alpha_used=alpha,
                        attempts=attempt,
                        clearance=separation_bound(cst.thresholds, alpha),
                    )
                log.warning(f"Lifted point failed verification at alpha={alpha:.3g} ({margin=})")
        alpha *= shrink

    raise AlphaExhaustedError(
        f"Every enlargement down to alpha={alpha / shrink:.3g} covers the sphere"
    )
