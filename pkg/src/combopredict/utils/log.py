import logging
from typing import Optional, Union

from rich.console import Console
from rich.logging import RichHandler


def setup_logging(level: Union[int, str] = "WARNING", console: Optional[Console] = None) -> None:
    """Route all combopredict loggers through one RichHandler on stderr"""
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=False,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger = logging.getLogger("combopredict")
    logger.handlers.clear()
    logger.addHandler(handler)
    logger.setLevel(level)
