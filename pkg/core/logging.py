import logging
import sys

from core.config import settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: str | None = None) -> None:
    """Install the stream handler once; later calls only adjust the level."""
    root = logging.getLogger()
    resolved = (level or settings.log_level).upper()
    if not any(getattr(h, "_contractum", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._contractum = True
        root.addHandler(handler)
    root.setLevel(resolved)
