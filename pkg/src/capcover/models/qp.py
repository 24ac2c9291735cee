"""Quadratic programming view of cap coverage.

Caps (t_i, θ_i) fail to cover the sphere exactly when the polytope {x : (x, t_i) <= θ_i} has a
point of norm below 1 and a point of norm above 1. The minimum of ||x||^2 over the polytope is
convex and solved exactly; the maximum is concave and only bounded from below by local ascent.
"""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import numpy.typing as npt
from scipy.optimize import nnls

from capcover._config import CoverConfig, QpConfig
from capcover._utils.alerts import logger as log
from capcover.models.exceptions import (
    DegenerateInstanceError,
    InfeasibleError,
    InvalidInstanceError,
    MaxIterationsError,
    ZeroRowError,
)
from capcover.models.geometry import Constellation, Vector, find_antipodal_pair
from capcover.models.recursive import Verdict, cover


@dataclass(frozen=True, eq=False)
class QpInstance:
    """Decide whether {x : A x <= b} holds a point with ||x||^2 > c.

    Attributes:
        matrix: n x d constraint matrix.
        rhs: Right-hand sides b.
        scale: The constant c > 0.
        lift: Amount every normalised threshold is raised by before the coverage step. Zero
            decides closed caps; a positive value decides open caps, and is sound when relaxing
            each row by lift * sqrt(c) * ||a_i|| keeps NO instances below c.
    """

    matrix: Vector
    rhs: Vector
    scale: float
    lift: float = 0.0

    def __post_init__(self) -> None:
        """Validate shapes and the constant."""
        matrix = np.array(self.matrix, dtype=float, ndmin=2)
        rhs = np.array(self.rhs, dtype=float, ndmin=1)
        if matrix.shape[0] < 1 or rhs.shape != (matrix.shape[0],):
            raise InvalidInstanceError("A QP instance needs n >= 1 rows and n right-hand sides")
        if not self.scale > 0:
            raise InvalidInstanceError(f"The constant c must be positive, got {self.scale}")
        if not 0 <= self.lift < 1:
            raise InvalidInstanceError(f"The threshold lift must lie in [0, 1), got {self.lift}")
        zero = np.flatnonzero(~np.any(matrix, axis=1))
        if zero.size:
            raise ZeroRowError(f"Row {zero[0]} of A is zero")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "lift", float(self.lift))

    @property
    def dim(self) -> int:
        """Number of variables."""
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class Halfspaces:
    """The system (x, normal_i) <= offset_i."""

    normals: Vector
    offsets: Vector

    def __iter__(self) -> Iterator[tuple[Vector, float]]:
        """Iterate over (normal, offset) pairs."""
        return iter(zip(self.normals, (float(b) for b in self.offsets), strict=True))

    def __len__(self) -> int:
        """Number of halfspaces."""
        return self.offsets.size

    @property
    def dim(self) -> int:
        """Ambient dimension."""
        return self.normals.shape[1]

    def residual(self, point: npt.ArrayLike) -> float:
        """Largest constraint violation at a point (negative or zero when feasible)."""
        return float(np.max(self.normals @ np.asarray(point, dtype=float) - self.offsets))

    @classmethod
    def from_constellation(cls, cst: Constellation) -> "Halfspaces":
        """The polytope whose points of norm 1 are exactly the uncovered points."""
        return cls(np.array(cst.axes), np.array(cst.thresholds))


@dataclass(frozen=True, eq=False)
class MinResult:
    """Minimum of ||x||^2 over a polytope and the point attaining it."""

    value: float
    point: Vector


@dataclass(frozen=True, eq=False)
class MaxResult:
    """Best ||x||^2 found by local ascent; `value` is inf when a recession direction exists."""

    value: float
    point: Vector
    unbounded: bool = False
    starts_used: int = 0


@dataclass(frozen=True, eq=False)
class QpResult:
    """Both sides of the quadratic program for one constellation."""

    m: float
    x_min: Vector
    m_hat: float
    x_max: Vector
    unbounded: bool = False


@dataclass(frozen=True, eq=False)
class QpVerdict(Verdict):
    """Verdict of `cover_qp` with the solved programs attached."""

    qp: QpResult | None = None


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 1..n."""

    vertices: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        """Normalise edges to (low, high) and validate them."""
        normalised = set()
        for u, v in self.edges:
            if u == v:
                raise InvalidInstanceError(f"Self-loop at vertex {u}")
            if not (1 <= u <= self.vertices and 1 <= v <= self.vertices):
                raise InvalidInstanceError(f"Edge ({u}, {v}) is outside 1..{self.vertices}")
            normalised.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(normalised))

    def has_edge(self, u: int, v: int) -> bool:
        """Whether u and v are adjacent."""
        return (min(u, v), max(u, v)) in self.edges

    def non_edges(self) -> list[tuple[int, int]]:
        """All non-adjacent pairs, lexicographically ordered."""
        return [
            pair for pair in combinations(range(1, self.vertices + 1), 2) if pair not in self.edges
        ]


def normalize_instance(q: QpInstance) -> Halfspaces:
    """Rescale an instance to unit normals and c = 1 via x' = x / sqrt(c).

    Returns:
        Halfspaces: Normals a_i / ||a_i|| and offsets b_i / (sqrt(c) ||a_i||).
    """
    norms = np.linalg.norm(q.matrix, axis=1)
    return Halfspaces(q.matrix / norms[:, None], q.rhs / (np.sqrt(q.scale) * norms))


def _least_distance(normals: Vector, offsets: Vector, tol: float, max_iter: int | None) -> Vector:
    """Shortest vector y with normals @ y <= offsets.

    Solved as a non-negative least squares problem: with E = [-A^T; -b^T] and f = e_{d+1}, the
    residual r = E u - f of the NNLS solution gives y = -r[:d] / r[d], and r = 0 means infeasible.
    """
    dim = normals.shape[1]
    system = np.vstack([-normals.T, -offsets[None, :]])
    target = np.zeros(dim + 1)
    target[-1] = 1.0
    try:
        weights, _ = nnls(system, target, maxiter=max_iter)
    except RuntimeError as e:
        raise MaxIterationsError(f"NNLS did not converge: {e}") from e
    residual = system @ weights - target
    if np.linalg.norm(residual) <= tol or residual[-1] >= 0:
        raise InfeasibleError("The constraint polytope is empty")
    return -residual[:-1] / residual[-1]


def min_norm_point(
    constraints: Halfspaces, tol: float = 1e-10, max_iter: int | None = None
) -> MinResult:
    """Project the origin onto the polytope.

    Args:
        constraints (Halfspaces): At least one halfspace.
        tol (float, optional): Residual below which the system counts as infeasible.
        max_iter (int, optional): Iteration cap of the NNLS solver.

    Returns:
        MinResult: m = ||x_min||^2 and x_min.

    Raises:
        InfeasibleError: If the polytope is empty.
        MaxIterationsError: If the solver does not converge.
    """
    if len(constraints) == 0:
        raise InvalidInstanceError("min_norm_point needs at least one constraint")
    if np.all(constraints.offsets >= 0):
        origin = np.zeros(constraints.dim)
        return MinResult(0.0, origin)

    point = _least_distance(constraints.normals, constraints.offsets, tol, max_iter)
    return MinResult(float(point @ point), point)


def project_point(
    constraints: Halfspaces, point: npt.ArrayLike, tol: float = 1e-10, max_iter: int | None = None
) -> Vector:
    """Closest feasible point to `point`."""
    point = np.asarray(point, dtype=float)
    shifted = constraints.offsets - constraints.normals @ point
    if np.all(shifted >= 0):
        return point.copy()
    return point + _least_distance(constraints.normals, shifted, tol, max_iter)


def _default_starts(dim: int, count: int, seed: int) -> list[Vector]:
    """Origin, then ± coordinate directions, then seeded Gaussian points, `count` in total."""
    starts = [np.zeros(dim)]
    for k in range(dim):
        for sign in (1.0, -1.0):
            starts.append(sign * np.eye(dim)[k])
    rng = np.random.default_rng(seed)
    while len(starts) < count:
        starts.append(rng.standard_normal(dim))
    return starts[:count]


def _ascend(
    constraints: Halfspaces, start: Vector, tol: float, max_iter: int
) -> tuple[Vector, bool]:
    """Climb ||x||^2 from a feasible point until no feasible ascent direction is left.

    Each step projects the gradient onto the cone of directions keeping the active constraints
    satisfied and moves to the first blocking constraint. Returns the final point and whether the
    ascent direction met no blocking constraint at all.
    """
    normals, offsets = constraints.normals, constraints.offsets
    x = start.copy()
    for _ in range(max_iter):
        slack = offsets - normals @ x
        active = slack <= tol * (1.0 + np.abs(offsets))
        gradient = x if np.linalg.norm(x) > tol else np.eye(x.size)[0]

        direction = gradient
        if active.any():
            blocking_normals = normals[active]
            weights, _ = nnls(blocking_normals.T, gradient)
            direction = gradient - blocking_normals.T @ weights
        if np.linalg.norm(direction) <= 1e3 * tol * max(1.0, np.linalg.norm(gradient)):
            return x, False

        rates = normals @ direction
        ahead = ~active & (rates > tol)
        if not ahead.any():
            return x, True
        step = float(np.min(slack[ahead] / rates[ahead]))
        x = x + step * direction
    raise MaxIterationsError(f"Ascent did not settle within {max_iter} steps")


def heuristic_max(
    constraints: Halfspaces,
    starts: int | Sequence[npt.ArrayLike] | None = None,
    tol: float = 1e-9,
    max_iter: int = 1000,
    seed: int = 0,
) -> MaxResult:
    """Multi-start local maximisation of ||x||^2 over the polytope.

    Args:
        constraints (Halfspaces): A feasible system.
        starts (int | Sequence, optional): Explicit start points, or how many default starts to
            use (16 when omitted).
        tol (float, optional): Activity and stationarity tolerance.
        max_iter (int, optional): Step cap per start; a start hitting it is discarded.
        seed (int, optional): Seed for the random default starts.

    Returns:
        MaxResult: The best local maximum found; unbounded with value inf when some ascent runs
            along a feasible recession direction.

    Raises:
        InfeasibleError: If the polytope is empty.
        MaxIterationsError: If every start hits the step cap.
    """
    if starts is None or isinstance(starts, int):
        points = _default_starts(constraints.dim, 16 if starts is None else starts, seed)
    else:
        points = [np.asarray(s, dtype=float) for s in starts]

    best: MaxResult | None = None
    for used, start in enumerate(points, start=1):
        feasible = project_point(constraints, start)
        try:
            x, unbounded = _ascend(constraints, feasible, tol, max_iter)
        except MaxIterationsError as e:
            log.debug(f"Discarding start {used}: {e}")
            continue
        if unbounded:
            log.debug(f"Start {used} found a recession direction")
            return MaxResult(float("inf"), x, unbounded=True, starts_used=used)
        if constraints.residual(x) > 0:
            x = project_point(constraints, x)
        value = float(x @ x)
        if best is None or value > best.value:
            best = MaxResult(value, x, starts_used=used)

    if best is None:
        raise MaxIterationsError("Every start hit the iteration cap")
    return MaxResult(best.value, best.point, starts_used=len(points))


def cover_qp(
    cst: Constellation,
    cfg: QpConfig | None = None,
    starts: int | Sequence[npt.ArrayLike] | None = None,
    eps: float = 1e-9,
) -> QpVerdict:
    """Heuristic coverage check through the two quadratic programs.

    Not covered exactly when min ||x||^2 < 1 < max ||x||^2. The maximum is only estimated from
    below, so a COVERED answer may be wrong; NOT COVERED answers are always right.

    Returns:
        QpVerdict: Flagged heuristic; carries a `QpResult` in `qp` when both sides were solved.
    """
    cfg = cfg or QpConfig()
    if pair := find_antipodal_pair(cst.axes, cst.thresholds, eps):
        log.debug(f"Caps {pair} are complementary")
        return QpVerdict(covered=True, heuristic=True)

    system = Halfspaces.from_constellation(cst)
    try:
        low = min_norm_point(system, tol=cfg.tol, max_iter=cfg.max_iter)
    except InfeasibleError:
        return QpVerdict(covered=True, heuristic=True)

    high = heuristic_max(
        system, starts=cfg.starts if starts is None else starts, seed=cfg.seed
    )
    result = QpResult(low.value, low.point, high.value, high.point, high.unbounded)
    return QpVerdict(
        covered=not (low.value < 1.0 < high.value), heuristic=True, qp=result
    )


def qp_to_cover(
    q: QpInstance, cfg: QpConfig | None = None, cover_cfg: CoverConfig | None = None
) -> bool:
    """Decide whether {x : A x <= b} holds a point with ||x||^2 > c by a coverage check.

    Args:
        q (QpInstance): The instance; its polytope must not be confined to a hyperplane.
        cfg (QpConfig, optional): Tolerances of the minimisation.
        cover_cfg (CoverConfig, optional): Configuration of the recursive solver.

    Returns:
        bool: True when such a point exists.

    Raises:
        DegenerateInstanceError: If two constraints are antipodal with opposite offsets.
    """
    cfg = cfg or QpConfig()
    cover_cfg = cover_cfg or CoverConfig()
    system = normalize_instance(q)

    if pair := find_antipodal_pair(system.normals, system.offsets, cover_cfg.eps):
        raise DegenerateInstanceError(f"Constraints {pair} confine the polytope to a hyperplane")

    try:
        low = min_norm_point(system, tol=cfg.tol, max_iter=cfg.max_iter)
    except InfeasibleError:
        return False
    if low.value >= 1.0 - cover_cfg.eps:
        return True

    thresholds = system.offsets + q.lift
    keep = thresholds < 1.0 - cover_cfg.eps
    if not keep.any():
        return True
    cst = Constellation(system.normals[keep], thresholds[keep])
    return not cover(cst, cover_cfg, want_witness=False).covered


def clique_instance(g: Graph, k: int) -> QpInstance:
    """Encode "g has a k-clique" as a quadratic program.

    Variables x_1..x_n with -1 <= x_i <= 1, x_i + x_j <= 0 for every non-edge and
    -(x_1 + ... + x_n) <= n - 2k; the instance asks for ||x||^2 > n - 2/n.

    A k-clique gives a vertex of squared norm n. Without one, every row can be relaxed by
    1 / (4 n^3) and the relaxed polytope still stays below n - 2/n, which sets `lift`.

    Raises:
        InvalidInstanceError: If g has fewer than two vertices or k is outside 1..n.
    """
    n = g.vertices
    if n < 2:  # noqa: PLR2004
        raise InvalidInstanceError(f"The clique reduction needs at least 2 vertices, got {n}")
    if not 1 <= k <= n:
        raise InvalidInstanceError(f"k must lie in 1..{n}, got {k}")
    identity = np.eye(n)
    rows = [identity, -identity]
    rhs = [np.ones(n), np.ones(n)]
    for u, v in g.non_edges():
        rows.append((identity[u - 1] + identity[v - 1])[None, :])
        rhs.append(np.zeros(1))
    rows.append(-np.ones((1, n)))
    rhs.append(np.array([n - 2.0 * k]))
    scale = n - 2.0 / n
    return QpInstance(
        np.vstack(rows), np.concatenate(rhs), scale, lift=1.0 / (4.0 * n**3 * np.sqrt(scale))
    )


def brute_clique(g: Graph, k: int) -> bool:
    """Exhaustively check g for a k-clique (n <= 20)."""
    if g.vertices > 20:  # noqa: PLR2004
        raise InvalidInstanceError("brute_clique is limited to 20 vertices")
    return any(
        all(g.has_edge(u, v) for u, v in combinations(subset, 2))
        for subset in combinations(range(1, g.vertices + 1), k)
    )
