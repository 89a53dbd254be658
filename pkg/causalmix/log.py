"""
Logging setup for the command line and walkthrough scripts.
"""

import logging

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def configure_logging(level: str = "WARNING") -> None:
    """Install a single stream handler on the causalmix logger."""
    logger = logging.getLogger("causalmix")
    logger.setLevel(level.upper())
    if not any(getattr(h, "_causalmix", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._causalmix = True
        logger.addHandler(handler)
