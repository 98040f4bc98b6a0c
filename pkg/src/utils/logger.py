"""
Logging configuration for pppkit.

Human-readable lines go to stderr. When PPPKIT_LOG_FILE is set, every record is
also appended to that file as one JSON object per line, with structured fields
(lambda, seed, truncation radius, ...) under "extra".
"""

import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict

import numpy as np

from utils.config import Config

CONSOLE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _json_default(value: Any) -> Any:
    """Fallback encoder for numpy values and paths in structured fields."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


class JSONFormatter(logging.Formatter):
    """
    One JSON object per record.
    """

    def format(self, record: logging.LogRecord) -> str:
        entry: Dict[str, Any] = {
            'timestamp': datetime.fromtimestamp(record.created, timezone.utc).isoformat().replace('+00:00', 'Z'),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'where': f"{record.module}.{record.funcName}:{record.lineno}",
        }

        fields = getattr(record, 'extra_data', None)
        if fields:
            entry['extra'] = fields

        if record.exc_info:
            entry['exception'] = self.formatException(record.exc_info)

        return json.dumps(entry, default=_json_default)


def _console_handler() -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    return handler


def _json_file_handler(path: str) -> logging.Handler:
    log_path = Path(path)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(log_path)
    handler.setFormatter(JSONFormatter())
    return handler


def setup_logger(name: str, level: str = '') -> logging.Logger:
    """
    Get a configured module logger.

    Args:
        name: Logger name (typically __name__)
        level: Level name such as 'DEBUG'; defaults to PPPKIT_LOG_LEVEL

    Returns:
        Logger with a stderr handler and, if PPPKIT_LOG_FILE is set, a JSON file handler
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO))

    # Handlers are attached once per logger name
    if logger.handlers:
        return logger

    logger.addHandler(_console_handler())
    if Config.LOG_FILE:
        logger.addHandler(_json_file_handler(Config.LOG_FILE))

    return logger


def log_with_extra(logger: logging.Logger, level: int, message: str, **fields) -> None:
    """
    Log a message carrying structured fields for the JSON log.

    Args:
        logger: Logger instance
        level: Log level (e.g., logging.INFO)
        message: Log message
        **fields: Values emitted under "extra" in the JSON record
    """
    logger.log(level, message, extra={'extra_data': fields})
