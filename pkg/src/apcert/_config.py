"""Runtime limits and backend selection, read from the environment at call time."""

from __future__ import annotations

import os

DEFAULT_MAX_ORDER = 40320
DEFAULT_ENUM_LIMIT = 5040
DEFAULT_ORACLE_MAX_SIZE = 24
DEFAULT_ORBIT_BUDGET = 10**6
ASSOCIATIVITY_CHECK_LIMIT = 256
WITNESS_CAP = 8


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from exc


def max_order() -> int:
    """Largest group order any constructor will accept (``APCERT_MAX_ORDER``)."""
    return _env_int("APCERT_MAX_ORDER", DEFAULT_MAX_ORDER)


def enumeration_limit() -> int:
    """Largest group order for which AP enumeration runs without ``force``."""
    return _env_int("APCERT_ENUM_LIMIT", DEFAULT_ENUM_LIMIT)


def use_numba() -> bool:
    """False when ``APCERT_NO_NUMBA`` is set to a truthy value or numba is missing."""
    flag = os.environ.get("APCERT_NO_NUMBA", "").strip().lower()
    if flag in ("1", "true", "yes", "on"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True
