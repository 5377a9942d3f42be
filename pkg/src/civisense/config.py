"""Server configuration: one JSON file, overridable via environment variables.

File keys and their ``CIVISENSE_*`` overrides:

    listen                   CIVISENSE_LISTEN            host:port, default 127.0.0.1:8025
    data_dir                 CIVISENSE_DATA_DIR          log + blob directory
    threshold                CIVISENSE_THRESHOLD         community validation threshold
    cell_size                CIVISENSE_CELL_SIZE         default map grid pitch (degrees)
    anon_rate_limit_per_min  CIVISENSE_ANON_RATE_LIMIT   0 disables the limiter
    session_ttl_hours        CIVISENSE_SESSION_TTL_HOURS
    kdf_iterations           CIVISENSE_KDF_ITERATIONS
    fsync                    CIVISENSE_FSYNC             "0"/"false" to disable
    stream_keepalive_secs    CIVISENSE_STREAM_KEEPALIVE
    admin_name               CIVISENSE_ADMIN_NAME        bootstrap admin account
    admin_credential         CIVISENSE_ADMIN_CREDENTIAL
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from . import geo, trust
from .service import ServiceConfig


@dataclass
class AppConfig:
    listen: str = "127.0.0.1:8025"
    data_dir: Path = Path("./civisense-data")
    threshold: float = trust.DEFAULT_THRESHOLD
    cell_size: float = geo.DEFAULT_CELL_SIZE
    anon_rate_limit_per_min: int = 10
    session_ttl_hours: float = 24.0
    kdf_iterations: int = 100_000
    fsync: bool = True
    stream_keepalive_secs: float = 15.0
    admin_name: Optional[str] = None
    admin_credential: Optional[str] = None

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])

    def service_config(self) -> ServiceConfig:
        return ServiceConfig(
            data_dir=Path(self.data_dir),
            threshold=self.threshold,
            cell_size=self.cell_size,
            anon_rate_limit_per_min=self.anon_rate_limit_per_min,
            session_ttl_hours=self.session_ttl_hours,
            kdf_iterations=self.kdf_iterations,
            fsync=self.fsync,
            admin_name=self.admin_name,
            admin_credential=self.admin_credential,
        )


def _as_bool(raw: str) -> bool:
    return str(raw).strip().lower() not in ("0", "false", "no", "off", "")


_ENV_KEYS = {
    "CIVISENSE_LISTEN": ("listen", str),
    "CIVISENSE_DATA_DIR": ("data_dir", Path),
    "CIVISENSE_THRESHOLD": ("threshold", float),
    "CIVISENSE_CELL_SIZE": ("cell_size", float),
    "CIVISENSE_ANON_RATE_LIMIT": ("anon_rate_limit_per_min", int),
    "CIVISENSE_SESSION_TTL_HOURS": ("session_ttl_hours", float),
    "CIVISENSE_KDF_ITERATIONS": ("kdf_iterations", int),
    "CIVISENSE_FSYNC": ("fsync", _as_bool),
    "CIVISENSE_STREAM_KEEPALIVE": ("stream_keepalive_secs", float),
    "CIVISENSE_ADMIN_NAME": ("admin_name", str),
    "CIVISENSE_ADMIN_CREDENTIAL": ("admin_credential", str),
}

_FILE_CASTS = {
    "listen": str,
    "data_dir": Path,
    "threshold": float,
    "cell_size": float,
    "anon_rate_limit_per_min": int,
    "session_ttl_hours": float,
    "kdf_iterations": int,
    "fsync": bool,
    "stream_keepalive_secs": float,
    "admin_name": str,
    "admin_credential": str,
}


def load_config(path: Optional[str] = None, env: Mapping[str, str] = os.environ) -> AppConfig:
    """Read the config file (if given), then apply environment overrides."""
    config = AppConfig()
    if path:
        raw = json.loads(Path(path).read_text("utf-8"))
        for key, value in raw.items():
            if key not in _FILE_CASTS:
                raise ValueError(f"unknown config key {key!r}")
            setattr(config, key, _FILE_CASTS[key](value))
    for env_key, (field_name, cast) in _ENV_KEYS.items():
        if env_key in env:
            setattr(config, field_name, cast(env[env_key]))
    return config
