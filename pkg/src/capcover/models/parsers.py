"""Parsers and writers for the constellation, QP instance and graph text formats."""

import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np
import regex as re

from capcover.models.exceptions import InvalidInstanceError, ParseError
from capcover.models.geometry import Constellation
from capcover.models.qp import Graph, QpInstance

NORM_TOLERANCE = 1e-3


@dataclass
class Parser:
    """Regex patterns shared by the text formats.

    Lines starting with `#` are comments. Values are separated by commas and/or whitespace.
    """

    comment = re.compile(r"^\s*(?:#.*)?$")
    separator = re.compile(r"[,\s]+")
    dim_header = re.compile(r"^\s*dim\s+(?P<dim>\d+)\s*$", flags=re.I)
    qp_header = re.compile(
        r"^\s*qp\s+(?P<rows>\d+)\s+(?P<dim>\d+)\s+(?P<scale>\S+)\s*$", flags=re.I
    )
    graph_header = re.compile(r"^\s*graph\s+(?P<vertices>\d+)\s*$", flags=re.I)
    sqrt_ratio = re.compile(
        r"""
        ^\s*
        sqrt\s*\(?\s*(?P<radicand>\d+(?:\.\d+)?)\s*\)?  # sqrt3 or sqrt(3)
        \s*/\s*
        (?P<denominator>\d+(?:\.\d+)?)                   # /2
        \s*$
        """,
        flags=re.X | re.I,
    )


def _content_lines(text: str) -> Iterator[tuple[int, str]]:
    """Yield (line number, stripped line) for every line that is not blank or a comment."""
    for number, line in enumerate(text.splitlines(), start=1):
        if not Parser.comment.match(line):
            yield number, line.strip()


def _floats(line: str, number: int) -> list[float]:
    """Split a data line into floats."""
    try:
        return [float(token) for token in Parser.separator.split(line) if token]
    except ValueError as e:
        raise ParseError(f"Not a number in '{line}'", number) from e


def _is_unit(values: list[float]) -> bool:
    return abs(math.hypot(*values) - 1.0) <= NORM_TOLERANCE


def parse_theta(expr: str) -> float:
    """Parse a threshold given as a decimal or as `sqrtN/M`, for instance `sqrt3/2`.

    Raises:
        ParseError: If the expression is neither form or the value is outside (-1, 1).
    """
    if match := Parser.sqrt_ratio.match(expr):
        value = math.sqrt(float(match.group("radicand"))) / float(match.group("denominator"))
    else:
        try:
            value = float(expr)
        except ValueError as e:
            raise ParseError(f"Cannot read threshold '{expr}'") from e
    if not -1.0 < value < 1.0:
        raise ParseError(f"Threshold {expr} is outside (-1, 1)")
    return value


def _guess_dim(rows: list[tuple[int, list[float]]]) -> int:
    """Pick the dimension of a headerless file from all of its rows.

    Every row must read the same way: either all rows are unit axes, or all rows are unit axes
    followed by a threshold.

    Raises:
        ParseError: If neither reading or both readings fit every row.
    """
    columns = len(rows[0][1])
    axes_only = all(_is_unit(values) for _, values in rows)
    with_threshold = columns > 2 and all(  # noqa: PLR2004
        _is_unit(values[:-1]) for _, values in rows
    )
    if axes_only and with_threshold:
        raise ParseError(
            f"Rows read both as {columns}-dimensional axes and as {columns - 1}-dimensional axes "
            "with a threshold; add a 'dim d' header"
        )
    if with_threshold:
        return columns - 1
    if axes_only:
        return columns
    for number, values in rows:
        if not _is_unit(values) and (columns == 2 or not _is_unit(values[:-1])):  # noqa: PLR2004
            axis = values if columns == 2 else values[:-1]  # noqa: PLR2004
            raise ParseError(f"Axis norm {math.hypot(*axis):.6g} is not close to 1", number)
    raise ParseError("Rows mix axes with and without thresholds; add a 'dim d' header")


def parse_constellation(text: str, theta: float | None = None) -> Constellation:
    """Read a constellation file.

    An optional `dim d` header fixes the dimension; rows then hold d axis coordinates, optionally
    followed by a threshold. Without a header the dimension is read off all rows together:
    either every row is a unit axis, or every row is a unit axis followed by its threshold.
    Files where both readings fit need the header. Thresholds in the file take precedence over
    `theta`. Axes within 1e-3 of unit norm are normalised.

    Args:
        text (str): File contents.
        theta (float, optional): Threshold for rows that carry none.

    Returns:
        Constellation: The caps.

    Raises:
        ParseError: On a malformed row, inconsistent columns, a non-unit axis, a threshold outside
            (-1, 1), a missing threshold, an ambiguous headerless file or an empty file.
    """
    dim: int | None = None
    rows: list[tuple[int, list[float]]] = []

    for number, line in _content_lines(text):
        if match := Parser.dim_header.match(line):
            if rows or dim is not None:
                raise ParseError("The dim header must come before the data", number)
            dim = int(match.group("dim"))
            if dim < 2:  # noqa: PLR2004
                raise ParseError(f"Dimension must be at least 2, got {dim}", number)
            continue

        values = _floats(line, number)
        if rows and len(values) != len(rows[0][1]):
            raise ParseError(f"Expected {len(rows[0][1])} values, found {len(values)}", number)
        rows.append((number, values))

    if not rows:
        raise ParseError("No caps found")
    if dim is None:
        dim = _guess_dim(rows)

    axes: list[list[float]] = []
    thresholds: list[float] = []
    for number, values in rows:
        if len(values) not in (dim, dim + 1):
            raise ParseError(f"Expected {dim} or {dim + 1} values, found {len(values)}", number)
        axis, threshold = values[:dim], values[dim] if len(values) == dim + 1 else theta
        if not _is_unit(axis):
            raise ParseError(f"Axis norm {math.hypot(*axis):.6g} is not close to 1", number)
        if threshold is None:
            raise ParseError("Row has no threshold and none was given", number)
        if not -1.0 < threshold < 1.0:
            raise ParseError(f"Threshold {threshold} is outside (-1, 1)", number)
        norm = math.hypot(*axis)
        axes.append([x / norm for x in axis])
        thresholds.append(threshold)

    return Constellation(np.array(axes), np.array(thresholds))


def format_constellation(cst: Constellation, with_thresholds: bool = True) -> str:
    """Write a constellation with a `dim d` header and 17 significant digits per value.

    Args:
        cst (Constellation): The caps.
        with_thresholds (bool, optional): Append each cap's threshold to its row.

    Returns:
        str: Text accepted by `parse_constellation`.
    """
    lines = [f"dim {cst.dim}"]
    for axis, threshold in zip(cst.axes, cst.thresholds, strict=True):
        values = [*axis, threshold] if with_thresholds else list(axis)
        lines.append(" ".join(f"{value:.17g}" for value in values))
    return "\n".join(lines) + "\n"


def parse_qp(text: str) -> QpInstance:
    """Read a QP instance: a `qp n d c` header, then n rows holding a row of A and its b_i.

    Raises:
        ParseError: On a missing header, a malformed row or a wrong row count.
    """
    lines = list(_content_lines(text))
    if not lines or not (header := Parser.qp_header.match(lines[0][1])):
        raise ParseError("Expected header 'qp n d c'", lines[0][0] if lines else None)

    rows, dim = int(header.group("rows")), int(header.group("dim"))
    try:
        scale = float(header.group("scale"))
    except ValueError as e:
        raise ParseError(f"Cannot read c = '{header.group('scale')}'", lines[0][0]) from e

    data = []
    for number, line in lines[1:]:
        values = _floats(line, number)
        if len(values) != dim + 1:
            raise ParseError(f"Expected {dim + 1} values, found {len(values)}", number)
        data.append(values)
    if len(data) != rows:
        raise ParseError(f"Header announces {rows} rows, found {len(data)}")

    table = np.array(data, dtype=float).reshape(rows, dim + 1)
    try:
        return QpInstance(table[:, :dim], table[:, dim], scale)
    except InvalidInstanceError as e:
        raise ParseError(str(e)) from e


def parse_graph(text: str) -> Graph:
    """Read a graph: a `graph n` header, then one `u v` edge per line with vertices in 1..n.

    Raises:
        ParseError: On a missing header or a malformed edge.
    """
    lines = list(_content_lines(text))
    if not lines or not (header := Parser.graph_header.match(lines[0][1])):
        raise ParseError("Expected header 'graph n'", lines[0][0] if lines else None)

    vertices = int(header.group("vertices"))
    edges = set()
    for number, line in lines[1:]:
        tokens = [token for token in Parser.separator.split(line) if token]
        if len(tokens) != 2 or not all(token.isdigit() for token in tokens):  # noqa: PLR2004
            raise ParseError(f"Expected an edge 'u v', found '{line}'", number)
        u, v = (int(token) for token in tokens)
        if u == v or not (1 <= u <= vertices and 1 <= v <= vertices):
            raise ParseError(f"Edge ({u}, {v}) is not a pair of vertices in 1..{vertices}", number)
        edges.add((u, v))

    return Graph(vertices, frozenset(edges))
