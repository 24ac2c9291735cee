"""capcover package."""
