import os
from typing import Optional

from src.config.settings import settings  # type: ignore
from src.utils.logger import get_logger  # type: ignore

logger = get_logger("cli.config")


def _env(name: str) -> Optional[str]:
    """Environment value under the upper- or lower-case name."""
    return os.environ.get(name.upper()) or os.environ.get(name.lower())


def _resolve_int(cli_value: Optional[int], env_name: str, default: int) -> int:
    if cli_value is not None:
        return cli_value
    raw = _env(env_name)
    if raw is not None:
        try:
            return int(raw)
        except ValueError:
            logger.warning(f"{env_name}={raw!r} is not an integer, using {default}")
    return default


def resolve_max_generations(cli_value: Optional[int]) -> int:
    """Resolve generation budget with precedence: CLI > env > settings."""
    return _resolve_int(cli_value, "ANALYZER_MAX_GENERATIONS", settings.analyzer_max_generations)


def resolve_verify_samples(cli_value: Optional[int]) -> int:
    return _resolve_int(cli_value, "ANALYZER_VERIFY_SAMPLES", settings.analyzer_verify_samples)


def resolve_seed(cli_value: Optional[int]) -> int:
    return _resolve_int(cli_value, "ANALYZER_SEED", settings.analyzer_seed)


def resolve_picture(cli_value: Optional[str]) -> str:
    return cli_value or _env("ANALYZER_PICTURE") or settings.analyzer_picture


def resolve_format(cli_value: Optional[str]) -> str:
    return cli_value or _env("ANALYZER_FORMAT") or settings.analyzer_format
