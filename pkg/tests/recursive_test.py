# type: ignore
"""Test the recursive coverage decision."""

import math

import numpy as np
import pytest

from capcover._config import CoverConfig
from capcover.models.enums import ExitKind, SubcapKind
from capcover.models.geometry import Cap, Constellation, PlaneRegion
from capcover.models.recursive import cover, subcap
from capcover.models.sampling import mc_verify
from capcover.models.witness import lift_witness, verify_witness
from tests.helpers import arc_clearance, arc_oracle_covered, random_constellation, random_unit


def _circle(angles_deg, theta):
    angles = np.radians(angles_deg)
    return Constellation.uniform(np.column_stack([np.cos(angles), np.sin(angles)]), theta)


def _region(center, radius, external=False):
    return PlaneRegion(np.array(center, dtype=float), radius, external)


def test_subcap_intersecting_internal():
    """Test subcap() function.

    GIVEN two unit circles at distance 1
    WHEN the second is examined against the first
    THEN they share the arc x1 >= 1/2
    """
    result = subcap(_region([0, 0], 1.0), _region([1, 0], 1.0))
    assert result.kind is SubcapKind.SUBCAP
    np.testing.assert_allclose(result.cap.axis, [1.0, 0.0])
    assert result.cap.threshold == pytest.approx(0.5)


def test_subcap_intersecting_external():
    """Test subcap() function.

    GIVEN the exterior of a unit circle at distance 1
    WHEN it is examined against the first circle
    THEN it meets it where x1 <= 1/2
    """
    result = subcap(_region([0, 0], 1.0), _region([1, 0], 1.0, external=True))
    assert result.kind is SubcapKind.SUBCAP
    np.testing.assert_allclose(result.cap.axis, [-1.0, 0.0])
    assert result.cap.threshold == pytest.approx(-0.5)


@pytest.mark.parametrize(
    ("j", "expected"),
    [
        (_region([0, 0], 2.0), SubcapKind.COVERED),
        (_region([0, 0], 0.5), SubcapKind.DISJOINT),
        (_region([0, 0], 0.5, external=True), SubcapKind.COVERED),
        (_region([0, 0], 2.0, external=True), SubcapKind.DISJOINT),
        (_region([5, 0], 1.0), SubcapKind.DISJOINT),
        (_region([5, 0], 1.0, external=True), SubcapKind.COVERED),
        (_region([0.5, 0], 3.0), SubcapKind.COVERED),
        (_region([0, 0], 1.0), SubcapKind.DUPLICATE),
        (_region([0, 0], 1.0, external=True), SubcapKind.COVERED),
    ],
)
def test_subcap_whole_sphere_relations(j, expected):
    """Test subcap() function.

    GIVEN a concentric, distant, enclosing or identical region
    WHEN it is examined against the unit circle
    THEN it covers, misses or duplicates the whole circle
    """
    assert subcap(_region([0, 0], 1.0), j).kind is expected


def test_subcap_tangent_spheres():
    """Test subcap() function.

    GIVEN two externally tangent internal regions
    WHEN one is examined against the other
    THEN they meet in a single point, which leaves the sphere uncovered
    """
    assert subcap(_region([0, 0], 1.0), _region([2, 0], 1.0)).kind is SubcapKind.DISJOINT


@pytest.mark.parametrize(
    ("j", "expected"),
    [
        (_region([2.0], 1.0), SubcapKind.DISJOINT),
        (_region([-2.0], 1.0), SubcapKind.DISJOINT),
        (_region([2.0], 1.0 + 1e-10), SubcapKind.DISJOINT),
        (_region([2.0], 1.0 - 1e-10), SubcapKind.DISJOINT),
        (_region([2.0], 1.0, external=True), SubcapKind.COVERED),
        (_region([-2.0], 1.0, external=True), SubcapKind.COVERED),
    ],
)
def test_subcap_tangent_on_a_line(j, expected):
    """Test subcap() function.

    GIVEN intervals of a line touching the interval [-1, 1] at one end, within tolerance
    WHEN they are examined against it
    THEN an internal one meets a single point and an external one holds both ends
    """
    assert subcap(_region([0.0], 1.0), j).kind is expected


def test_subcap_dimension_mismatch():
    """Test subcap() function.

    GIVEN regions of different hyperplanes
    WHEN one is examined against the other
    THEN a ValueError is raised
    """
    with pytest.raises(ValueError, match="same hyperplane"):
        subcap(_region([0, 0], 1.0), _region([0], 1.0))


def test_cover_three_arcs_cover():
    """Test cover() function.

    GIVEN three arcs of half-width 66.4 degrees at 120 degree spacing
    WHEN coverage of the circle is decided
    THEN the circle is covered and no trace is returned
    """
    verdict = cover(_circle([0, 120, 240], 0.4))
    assert verdict.covered is True
    assert verdict.trace is None


def test_cover_three_arcs_leave_gaps():
    """Test cover() function.

    GIVEN three arcs of half-width 53.1 degrees at 120 degree spacing
    WHEN coverage of the circle is decided
    THEN the gaps are found on the line
    """
    verdict = cover(_circle([0, 120, 240], 0.6))
    assert verdict.covered is False
    assert verdict.trace.exit_kind is ExitKind.LINE


def test_cover_single_cap():
    """Test cover() function.

    GIVEN a single cap
    WHEN coverage is decided
    THEN the antipode of its axis is the exit
    """
    verdict = cover(Constellation([[0.0, 0.0, 1.0]], [0.5]))
    assert verdict.covered is False
    assert verdict.trace.exit_kind is ExitKind.ANTIPODE
    np.testing.assert_allclose(verdict.trace.payload, [0.0, 0.0, -1.0])


def test_cover_hemispheres():
    """Test cover() function.

    GIVEN two closed complementary hemispheres
    WHEN coverage is decided
    THEN the sphere is covered
    """
    cst = Constellation([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], [0.0, 0.0])
    assert cover(cst).covered is True


def test_cover_all_regions_bounded():
    """Test cover() function.

    GIVEN caps that all miss e1
    WHEN coverage is decided
    THEN the inversion center is the exit
    """
    cst = Constellation([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.5, 0.5])
    verdict = cover(cst)
    assert verdict.covered is False
    assert verdict.trace.exit_kind is ExitKind.INVERSION_CENTER


def test_cover_octahedron(octahedron):
    """Test cover() function.

    GIVEN six caps around ±e_k
    WHEN coverage is decided at thresholds 0.5 and 0.6
    THEN caps of 60 degrees cover S^2 and narrower ones do not
    """
    assert cover(octahedron).covered is True
    assert cover(octahedron.with_thresholds(np.full(6, 0.6))).covered is False


def test_cover_four_d_85(four_d_85):
    """Test cover() function.

    GIVEN the embedded constellation at sqrt(3)/2
    WHEN coverage of S^3 is decided
    THEN it does not cover, within the depth and fanout bounds
    """
    verdict = cover(four_d_85)
    assert verdict.covered is False
    assert 1 <= verdict.stats.max_depth <= 2
    assert verdict.stats.max_fanout <= len(four_d_85)


def test_cover_four_d_85_barely_enlarged(four_d_85, rng):
    """Test cover() function.

    GIVEN the embedded constellation with every threshold lowered by 0.00478
    WHEN coverage is decided, as given and after random rotations
    THEN every answer is covered
    """
    enlarged = four_d_85.enlarged(0.00478)
    assert cover(enlarged).covered is True
    for _ in range(2):
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        assert cover(enlarged.transformed(q)).covered is True


def test_cover_four_d_85_witnesses_along_schedule(four_d_85):
    """Test cover() function.

    GIVEN the embedded constellation enlarged along a shrinking schedule of alphas
    WHEN a negative answer comes back
    THEN its lifted witness lies in no cap's interior
    """
    for step in range(0, 45, 5):
        enlarged = four_d_85.enlarged(0.01 * 0.9**step)
        verdict = cover(enlarged)
        if verdict.covered:
            continue
        point = lift_witness(verdict.trace)
        assert np.linalg.norm(point) == pytest.approx(1.0, abs=1e-8)
        assert enlarged.margin(point) <= 1e-7


def test_cover_without_witness():
    """Test cover() function.

    GIVEN an uncovered circle
    WHEN no witness is requested
    THEN the trace is dropped
    """
    verdict = cover(_circle([0, 120, 240], 0.6), want_witness=False)
    assert verdict.covered is False
    assert verdict.trace is None


def test_cover_stats(octahedron):
    """Test cover() function.

    GIVEN the octahedron
    WHEN coverage is decided
    THEN the counters reflect one level of recursion
    """
    stats = cover(octahedron).stats.as_dict()
    assert set(stats) == {"calls", "max_depth", "rotations", "max_fanout"}
    assert stats["calls"] >= 2
    assert stats["max_depth"] == 1


def test_cover_rotation_is_undone():
    """Test cover() function.

    GIVEN a cap whose boundary passes through e1
    WHEN coverage is decided
    THEN a rotation is counted and the lifted witness is uncovered in the original frame
    """
    cst = Constellation([[0.5, math.sqrt(3) / 2, 0.0], [0.0, 0.0, 1.0]], [0.5, 0.2])
    verdict = cover(cst)
    assert verdict.covered is False
    assert verdict.stats.rotations >= 1
    point = lift_witness(verdict.trace)
    assert np.linalg.norm(point) == pytest.approx(1.0)
    assert cst.margin(point) <= 1e-9


def test_cover_circle_oracle(rng):
    """Test cover() function.

    GIVEN 1000 random arc sets clear of tangencies
    WHEN coverage of the circle is decided
    THEN the answer matches the arc-union oracle
    """
    checked = 0
    while checked < 1000:
        cst = random_constellation(rng, int(rng.integers(1, 31)), 2, low=-0.3, high=0.98)
        if len(cst) > 1 and arc_clearance(cst) <= 1e-6:
            continue
        assert cover(cst).covered is arc_oracle_covered(cst)
        checked += 1


def test_cover_monotonicity(rng):
    """Test cover() function.

    GIVEN random covering constellations
    WHEN thresholds are lowered or a cap is added
    THEN they still cover
    """
    for _ in range(200):
        dim = int(rng.integers(2, 5))
        cst = random_constellation(rng, int(rng.integers(4, 14)), dim, low=0.0, high=0.7)
        if not cover(cst).covered:
            continue
        assert cover(cst.enlarged(0.05)).covered is True
        extra = Cap(random_unit(rng, dim), float(rng.uniform(0.0, 0.9)))
        assert cover(cst.appended(extra)).covered is True


def test_cover_permutation_and_rotation(rng):
    """Test cover() function.

    GIVEN random constellations on S^2
    WHEN the caps are reordered or every axis is rotated
    THEN the answer is unchanged
    """
    for _ in range(100):
        cst = random_constellation(rng, int(rng.integers(4, 16)), 3, low=0.1, high=0.7)
        covered = cover(cst).covered
        order = rng.permutation(len(cst))
        assert cover(Constellation(cst.axes[order], cst.thresholds[order])).covered is covered
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        assert cover(cst.transformed(q)).covered is covered


def test_cover_monte_carlo_consistency(rng):
    """Test cover() function.

    GIVEN random constellations on S^2
    WHEN sampling finds an uncovered point
    THEN the decision is negative too
    """
    for seed in range(200):
        cst = random_constellation(rng, int(rng.integers(3, 16)), 3, low=0.2, high=0.8)
        if not mc_verify(cst, 10_000, seed).no_counterexample:
            assert cover(cst).covered is False


def test_cover_depth_and_fanout(rng):
    """Test cover() function.

    GIVEN random constellations in R^3 to R^5
    WHEN coverage is decided
    THEN recursion depth stays below d - 1 and fanout below n
    """
    for _ in range(50):
        dim = int(rng.integers(3, 6))
        cst = random_constellation(rng, int(rng.integers(5, 25)), dim, low=0.0, high=0.6)
        verdict = cover(cst)
        assert verdict.stats.max_depth <= dim - 2
        assert verdict.stats.max_fanout <= len(cst)


def test_cover_witness_soundness(rng):
    """Test cover() function.

    GIVEN random constellations in R^2 to R^4
    WHEN a negative answer comes back
    THEN its lifted witness is a unit vector in no cap's interior
    """
    for _ in range(100):
        dim = int(rng.integers(2, 5))
        cst = random_constellation(rng, int(rng.integers(1, 12)), dim, low=0.2, high=0.9)
        verdict = cover(cst, CoverConfig())
        if verdict.covered:
            continue
        point = lift_witness(verdict.trace)
        assert np.linalg.norm(point) == pytest.approx(1.0, abs=1e-8)
        assert cst.margin(point) <= 1e-7
        assert verify_witness(cst, point)[1] == pytest.approx(cst.margin(point))
