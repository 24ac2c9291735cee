# type: ignore
"""Helper functions for tests."""

import re

import numpy as np

from capcover.models.geometry import Constellation


def strip_ansi(text) -> str:
    """Remove ANSI escape sequences from a string.

    Args:
        text (str): String to remove ANSI escape sequences from.

    Returns:
        str: String without ANSI escape sequences.
    """
    ansi_chars = re.compile(r"(\x9B|\x1B\[)[0-?]*[ -\/]*[@-~]")
    return ansi_chars.sub("", text)


class Regex:
    """Assert that a given string meets some expectations.

    Usage:
        from tests.helpers import Regex

        assert caplog.text == Regex(r"^.*$", re.I)
    """

    def __init__(self, pattern, flags=0):
        self._regex = re.compile(pattern, flags)

    def __eq__(self, actual):
        """Define equality.

        Args:
            actual (str): String to be matched to the regex

        Returns:
            bool: True if the actual string matches the regex, False otherwise.
        """
        return bool(self._regex.search(actual))

    def __repr__(self):
        """Error printed on failed tests."""
        return f"Regex: '{self._regex.pattern}'"


def random_unit(rng, dim, count=None):
    """Uniform unit vectors; one vector when count is None, otherwise `count` rows."""
    points = rng.standard_normal((1 if count is None else count, dim))
    points /= np.linalg.norm(points, axis=1)[:, None]
    return points[0] if count is None else points


def random_constellation(rng, count, dim, low=-0.5, high=0.95):
    """Random axes with thresholds drawn uniformly from [low, high)."""
    return Constellation(random_unit(rng, dim, count), rng.uniform(low, high, size=count))


def circle_angles(cst):
    """Angle and half-width of every cap of a constellation in R^2."""
    return np.arctan2(cst.axes[:, 1], cst.axes[:, 0]), np.arccos(cst.thresholds)


def _angular_gap(a, b):
    """Absolute angular distance between angles, in [0, pi]."""
    return np.abs((a - b + np.pi) % (2 * np.pi) - np.pi)


def arc_clearance(cst):
    """Smallest distance between an arc endpoint and the boundary of another arc."""
    centers, widths = circle_angles(cst)
    ends = np.concatenate([centers - widths, centers + widths])
    owner = np.concatenate([np.arange(len(cst)), np.arange(len(cst))])
    gaps = np.abs(_angular_gap(ends[:, None], centers[None, :]) - widths[None, :])
    gaps[np.arange(ends.size), owner] = np.inf
    return float(gaps.min())


def arc_oracle_covered(cst, step=1e-7):
    """Decide coverage of the circle by closed arcs.

    An uncovered set has arc endpoints on its boundary, so checking just outside every endpoint
    finds it whenever the gaps are wider than `step`.
    """
    centers, widths = circle_angles(cst)
    points = np.concatenate([centers - widths - step, centers + widths + step])
    inside = _angular_gap(points[:, None], centers[None, :]) <= widths[None, :]
    return bool(np.all(np.any(inside, axis=1)))


def interval_oracle_covered(regions, points=None):
    """Decide coverage of the line by checking points just beyond every endpoint and far away."""
    ends = [r.lower for r in regions] + [r.upper for r in regions]
    if points is None:
        points = [e - 1e-7 for e in ends] + [e + 1e-7 for e in ends]
        points += [min(ends) - 10, max(ends) + 10]
    return all(any(r.contains(x) for r in regions) for x in points)
