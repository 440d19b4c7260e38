"""Logging and worker-pool helpers shared across isoflow."""

from isoflow.utils.logging import bind_run_context, configure_logging, get_logger
from isoflow.utils.parallel import ordered_map

__all__ = ["bind_run_context", "configure_logging", "get_logger", "ordered_map"]
