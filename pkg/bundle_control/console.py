"""Shared rich console and logging setup."""

import logging
import os

from rich.console import Console
from rich.logging import RichHandler

console = Console()


def configure_logging(level: str | None = None) -> None:
    """Route all logging through a RichHandler on the shared console.

    Args:
        level: Explicit level name. Falls back to LOG_LEVEL, then INFO.
    """
    name = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.INFO),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=False)],
        force=True,
    )
