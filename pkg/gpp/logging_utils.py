"""
Logging Setup
Installs a JSON (python-json-logger) or plain text formatter on the root logger
"""
import logging
import os
from typing import Optional

from pythonjsonlogger.json import JsonFormatter

TEXT_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
JSON_FIELDS = "%(asctime)s %(levelname)s %(name)s %(message)s"


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """
    Configure the root logger once per process.

    Args:
        level: level name, defaults to PGP_LOG_LEVEL or INFO
        fmt: 'json' or 'text', defaults to PGP_LOG_FORMAT or json
    """
    level = (level or os.getenv("PGP_LOG_LEVEL", "INFO")).upper()
    fmt = (fmt or os.getenv("PGP_LOG_FORMAT", "json")).lower()

    handler = logging.StreamHandler()
    if fmt == "json":
        handler.setFormatter(JsonFormatter(JSON_FIELDS))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))

    root = logging.getLogger()
    for old in list(root.handlers):
        root.removeHandler(old)
    root.addHandler(handler)
    root.setLevel(level)
