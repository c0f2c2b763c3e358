"""Service configuration: one JSON (or TOML) file plus env-var overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

ENV_PREFIX = "MTMC_"


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str = "."
    store_dir: str = "./store"
    work_dir: str = "./work"
    host: str = "127.0.0.1"
    port: int = 8900
    broker_uri: str = "inprocess://"
    snapshot_every: int = 500
    sampling_interval: int = 1
    confidence_threshold: float = 0.1
    recommend_mode: str = "blend"
    recommend_alpha: float = 0.3
    recommend_hops: int = 1
    window_min_s: float = 0.0
    window_max_s: float = 60.0


def _read_config_file(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".toml":
        try:
            import tomli
        except ImportError:
            try:
                import tomllib as tomli  # 3.11+
            except ImportError as exc:
                raise RuntimeError(
                    "TOML config requires Python 3.11+ or the tomli package; "
                    "use a JSON config otherwise"
                ) from exc
        return tomli.loads(text)
    return json.loads(text)


def load_service_config(
    path: Path | str | None = None,
    env: Mapping[str, str] | None = None,
) -> ServiceConfig:
    """Layered config: file values, then MTMC_* environment overrides."""
    env = os.environ if env is None else env
    doc: dict = {}
    if path is not None:
        doc.update(_read_config_file(Path(path)))

    overrides = {
        "data_dir": env.get(ENV_PREFIX + "DATA_DIR"),
        "store_dir": env.get(ENV_PREFIX + "STORE_DIR"),
        "work_dir": env.get(ENV_PREFIX + "WORK_DIR"),
        "host": env.get(ENV_PREFIX + "HOST"),
        "broker_uri": env.get(ENV_PREFIX + "BROKER_URI"),
    }
    for key, value in overrides.items():
        if value is not None:
            doc[key] = value
    port = env.get(ENV_PREFIX + "PORT")
    if port is not None:
        doc["port"] = int(port)

    known = {f for f in ServiceConfig.__dataclass_fields__}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown service config keys: {sorted(unknown)}")
    return ServiceConfig(**doc)


__all__ = ["ENV_PREFIX", "ServiceConfig", "load_service_config"]
