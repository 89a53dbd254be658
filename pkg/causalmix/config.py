#!/usr/bin/env python3
"""
Runtime settings - read from the environment (and a local .env file)
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

FIXTURES_DIR = Path(__file__).resolve().parent / "fixtures"
ALARM_PATH = FIXTURES_DIR / "alarm.cbn"

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class Settings:
    """Process-wide defaults."""
    log_level: str
    workers: int
    seed: int
    gold_network: Path


def _detect_log_level() -> str:
    """Log level from CAUSALMIX_LOG_LEVEL, WARNING otherwise."""
    level = os.getenv("CAUSALMIX_LOG_LEVEL", "WARNING").strip().upper()
    if level not in _LOG_LEVELS:
        raise ValueError(f"CAUSALMIX_LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)}, got '{level}'")
    return level


def _detect_int(key: str, default: int, minimum: int) -> int:
    raw = os.getenv(key)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{key} must be an integer, got '{raw}'")
    if value < minimum:
        raise ValueError(f"{key} must be >= {minimum}, got {value}")
    return value


def _detect_gold_network() -> Path:
    """Gold network path; falls back to the bundled ALARM fixture."""
    raw = os.getenv("CAUSALMIX_GOLD_NETWORK")
    if raw and raw.strip():
        return Path(raw.strip()).expanduser()
    return ALARM_PATH


def get_settings(log_level: Optional[str] = None, workers: Optional[int] = None) -> Settings:
    """Build settings; explicit arguments win over the environment."""
    return Settings(
        log_level=(log_level or _detect_log_level()).upper(),
        workers=workers if workers is not None else _detect_int("CAUSALMIX_WORKERS", 1, 1),
        seed=_detect_int("CAUSALMIX_SEED", 0, 0),
        gold_network=_detect_gold_network(),
    )
