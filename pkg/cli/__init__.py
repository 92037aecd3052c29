"""Command-line interface: ``python -m cli analyze <file>...``."""
