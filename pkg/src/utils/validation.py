"""
Input validation utilities.
Pure functions for validating command-line values.
"""

from typing import Dict, List, Optional

import sympy as sp

from ..core.exceptions import InputError
from ..core.kernel import IDENTIFIER_PATTERN
from ..core.models import OutputFormat, Picture
from ..core.parser import parse_rational


def parse_override(text: str) -> Dict[str, sp.Rational]:
    """Parse one 'name=value' parameter override."""
    if not text or "=" not in text:
        raise InputError(f"Override '{text}' must have the form name=value", field="set")
    name, value = (part.strip() for part in text.split("=", 1))
    if not IDENTIFIER_PATTERN.match(name):
        raise InputError(f"Invalid parameter name '{name}'", field="set")
    return {name: parse_rational(value, field="set")}


def parse_overrides(items: Optional[List[str]]) -> Dict[str, sp.Rational]:
    overrides: Dict[str, sp.Rational] = {}
    for item in items or []:
        overrides.update(parse_override(item))
    return overrides


def validate_picture(value: str) -> Picture:
    try:
        return Picture(value.strip().lower())
    except ValueError:
        raise InputError(f"Picture must be one of lagrangian, hamiltonian, both; got '{value}'", field="picture")


def validate_format(value: str) -> OutputFormat:
    try:
        return OutputFormat(value.strip().lower())
    except ValueError:
        raise InputError(f"Format must be text or json; got '{value}'", field="format")


def validate_positive(value: int, field_name: str) -> int:
    if not isinstance(value, int) or value < 1:
        raise InputError(f"{field_name} must be a positive integer", field=field_name)
    return value


def validate_non_negative(value: int, field_name: str) -> int:
    if not isinstance(value, int) or value < 0:
        raise InputError(f"{field_name} must be non-negative", field=field_name)
    return value
