"""Logging utilities with structured logging support"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import orjson
import structlog
from structlog.processors import JSONRenderer, TimeStamper

# Global logger cache
_loggers: Dict[str, structlog.stdlib.BoundLogger] = {}


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    json_format: bool = False,
) -> None:
    """Setup structured logging configuration

    Console output goes to stderr so that stdout stays free for command results.
    """

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        format="%(message)s",
        level=getattr(logging, log_level.upper(), logging.INFO),
        handlers=handlers,
        force=True,
    )

    shared_processors = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        TimeStamper(fmt="iso"),
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.UnicodeDecoder(),
    ]

    if json_format:
        processors = shared_processors + [
            structlog.processors.format_exc_info,
            JSONRenderer(serializer=lambda obj, **kw: orjson.dumps(obj, default=str).decode()),
        ]
    else:
        processors = shared_processors + [
            structlog.processors.ExceptionPrettyPrinter(),
            structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()),
        ]

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance"""
    if name not in _loggers:
        _loggers[name] = structlog.get_logger(name)
    return _loggers[name]


class LogContext:
    """Context manager for adding temporary context to logs"""

    def __init__(self, **kwargs: Any):
        self.context = kwargs

    def __enter__(self) -> "LogContext":
        structlog.contextvars.bind_contextvars(**self.context)
        return self

    def __exit__(self, *args: Any) -> None:
        structlog.contextvars.unbind_contextvars(*self.context)


class StageLog:
    """Collects per-stage records of an iterative construction

    Records are kept in memory and can be written as JSON lines; each record
    is also emitted through the structured logger under ``event``.
    """

    def __init__(self, event: str, logger_name: str = "stages"):
        self.event = event
        self.records: List[Dict[str, Any]] = []
        self._logger = get_logger(logger_name)

    def append(self, **record: Any) -> None:
        self.records.append(record)
        self._logger.info(self.event, **{k: str(v) for k, v in record.items()})

    def write(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as handle:
            for record in self.records:
                handle.write(orjson.dumps(record, default=str, option=orjson.OPT_SORT_KEYS))
                handle.write(b"\n")

    def __len__(self) -> int:
        return len(self.records)


# Initialize with default settings
setup_logging()
