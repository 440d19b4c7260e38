"""
structlog setup for isoflow.

Events are rendered on stderr (stdout carries command results). Numerical context values such as
numpy scalars or short arrays are converted to plain Python before rendering, and run-level
context (command, workflow, seed) is carried through ``structlog.contextvars``.
"""

import logging
import sys
from typing import Any

import numpy as np
import structlog
from structlog.types import EventDict, Processor

from isoflow.config import settings

# arrays longer than this are logged by shape only
MAX_LOGGED_ARRAY = 16


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        if value.size <= MAX_LOGGED_ARRAY:
            return value.tolist()
        return {"shape": list(value.shape), "dtype": str(value.dtype)}
    return value


def numpy_to_plain(logger: Any, method_name: str, event_dict: EventDict) -> EventDict:
    """Replace numpy values in the event with JSON-friendly equivalents."""
    for key, value in event_dict.items():
        event_dict[key] = _plain(value)
    return event_dict


def add_app_context(logger: Any, method_name: str, event_dict: EventDict) -> EventDict:
    event_dict.setdefault("app", "isoflow")
    return event_dict


def configure_logging(level: str | None = None, fmt: str | None = None) -> None:
    """
    Configure structlog over the stdlib logging module.

    Args:
        level: Overrides ``settings.log_level``
        fmt: ``json`` or ``console``; overrides ``settings.log_format``
    """
    log_level = getattr(logging, level or settings.log_level)
    renderer_name = fmt or settings.log_format

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=log_level, force=True)

    processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="iso"),
        add_app_context,
        numpy_to_plain,
        structlog.processors.StackInfoRenderer(),
    ]
    if renderer_name == "json":
        processors += [structlog.processors.format_exc_info, structlog.processors.JSONRenderer()]
    else:
        processors += [structlog.dev.set_exc_info, structlog.dev.ConsoleRenderer(colors=False)]

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


def bind_run_context(**context: Any) -> None:
    """Attach key/value context (e.g. command, workflow, seed) to every later event."""
    structlog.contextvars.bind_contextvars(**context)


def clear_run_context(*keys: str) -> None:
    """Drop the given context keys, or all run context when none are given."""
    if keys:
        structlog.contextvars.unbind_contextvars(*keys)
    else:
        structlog.contextvars.clear_contextvars()


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """
    Get a logger, configuring structlog on first use.

    Args:
        name: Logger name (typically ``__name__``)

    Returns:
        Bound structlog logger
    """
    if not structlog.is_configured():
        configure_logging()
    return structlog.get_logger(name)
