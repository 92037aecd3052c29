"""
Configuration settings for the constraint analyzer.
Manages environment variables and default values.
"""

from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings


class AnalyzerSettings(BaseSettings):
    """Analyzer configuration."""

    # Reduction defaults (overridden by CLI flags)
    analyzer_max_generations: int = 8
    analyzer_picture: str = "both"
    analyzer_format: str = "text"

    # Numeric verification
    analyzer_verify_samples: int = 32
    analyzer_seed: int = 0
    analyzer_resample_budget: int = 20
    analyzer_numeric_digits: int = 50
    analyzer_numeric_tolerance: float = 1e-30

    # Sample counts for rank and reducibility cross-checks
    analyzer_rank_samples: int = 50
    analyzer_reducibility_samples: int = 50

    # Development settings
    log_level: str = "WARNING"
    analyzer_log_file: Optional[str] = None

    class Config:
        env_prefix = ""
        env_file = ".env"
        case_sensitive = False


def find_env_file():
    """Find .env file in project root."""
    project_root = Path(__file__).parent.parent.parent
    env_file = project_root / ".env"
    return str(env_file) if env_file.exists() else None


env_file_path = find_env_file()
if env_file_path:
    settings = AnalyzerSettings(_env_file=env_file_path)
else:
    settings = AnalyzerSettings()
