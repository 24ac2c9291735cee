"""Custom exceptions for the capcover package."""


class CapCoverError(Exception):
    """Base exception for the capcover package."""


class InvalidInstanceError(CapCoverError, ValueError):
    """Exception for caps, constellations or instances violating their invariants."""


class DegenerateInputError(CapCoverError):
    """Exception for a point too close to the inversion center."""


class CenterOnBoundaryError(CapCoverError):
    """Exception for a cap whose boundary passes through the inversion center."""


class RotationExhaustedError(CapCoverError):
    """Exception when no protective rotation clears the inversion center."""


class MalformedTraceError(CapCoverError):
    """Exception for a witness trace whose levels are not contiguous."""


class AlphaExhaustedError(CapCoverError):
    """Exception when every enlarged problem is covered."""


class ZeroRowError(CapCoverError):
    """Exception for a constraint row with zero norm."""


class InfeasibleError(CapCoverError):
    """Exception for an empty constraint polytope."""


class MaxIterationsError(CapCoverError):
    """Exception when an iterative solver hits its iteration cap."""


class DegenerateInstanceError(CapCoverError):
    """Exception for a quadratic program confined to a hyperplane."""


class NoCoveringFoundError(CapCoverError):
    """Exception when the bound search never finds a covering constellation."""


class ParseError(CapCoverError):
    """Exception for malformed input files."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")
