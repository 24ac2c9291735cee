"""Enum classes for capcover."""

from enum import Enum


class ExitKind(Enum):
    """How the recursive solver found an uncovered boundary point.

    ANTIPODE: a single cap remained; the antipode of its axis is uncovered.
    INVERSION_CENTER: every region was internal; the inversion center is uncovered.
    LINE: the one-dimensional sweep left a gap; the payload is a line coordinate.
    WHOLE_SPHERE: no other region touches the sphere of the failing region.
    """

    ANTIPODE = "antipode"
    INVERSION_CENTER = "inversion-center"
    LINE = "line"
    WHOLE_SPHERE = "whole-sphere"


class SubcapKind(Enum):
    """Relation of one region to the bounding sphere of another."""

    COVERED = "covered-by-other"
    DISJOINT = "disjoint"
    DUPLICATE = "duplicate"
    SUBCAP = "subcap"


class VerdictLabel(Enum):
    """Answers printed by the command line interface."""

    COVERED = "COVERED"
    NOT_COVERED = "NOT_COVERED"
    NO_COUNTEREXAMPLE = "NO_COUNTEREXAMPLE"
    YES = "YES"
    NO = "NO"
