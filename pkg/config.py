import os
from dataclasses import dataclass
from typing import Optional

from exceptions import ConfigError

ENGINE_VERSION = "1.0.0"


@dataclass
class EngineConfig:
    log_level: str = "INFO"
    log_file: Optional[str] = None
    quad_tol: float = 1e-10
    monotone_grid: int = 64
    output_dir: str = "output"
    max_workers: int = 4


def _env_number(name: str, default: str, kind: type):
    raw = os.getenv(name, default)
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(f"Invalid value for {name}", repr(raw), field=name) from None
    if value <= 0:
        raise ConfigError(f"{name} must be positive", repr(raw), field=name)
    return value


def load_config() -> EngineConfig:
    try:
        from dotenv import load_dotenv
        load_dotenv()
    except ImportError:
        # dotenv is optional, continue without it
        pass

    return EngineConfig(
        log_level=os.getenv("BFI_LOG_LEVEL", "INFO").upper(),
        log_file=os.getenv("BFI_LOG_FILE") or None,
        quad_tol=_env_number("BFI_QUAD_TOL", "1e-10", float),
        monotone_grid=_env_number("BFI_MONOTONE_GRID", "64", int),
        output_dir=os.getenv("BFI_OUTPUT_DIR", "output"),
        max_workers=_env_number("BFI_MAX_WORKERS", "4", int),
    )

