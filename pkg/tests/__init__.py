"""capcover test suite."""
