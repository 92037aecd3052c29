"""Configuration management for the constraint analyzer."""

from .settings import AnalyzerSettings, settings

__all__ = ["AnalyzerSettings", "settings"]
