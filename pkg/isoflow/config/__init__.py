"""Configuration management for isoflow."""

from isoflow.config.settings import Settings, get_settings

settings = get_settings()

__all__ = ["Settings", "settings", "get_settings"]
