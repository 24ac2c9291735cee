"""Rich console object for the application."""
from rich.console import Console

console = Console()
