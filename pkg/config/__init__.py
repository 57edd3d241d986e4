"""Configuration package."""

from config.settings import settings, Settings, RUN_SUBDIRS
from config.logging_config import setup_logging, get_logger

__all__ = ["settings", "Settings", "RUN_SUBDIRS", "setup_logging", "get_logger"]
