"""Runtime settings from environment variables and an optional config file.

Environment variables (all optional):

    LLMBERJACK_API_KEY       provider API key
    LLMBERJACK_DATA_DIR      flat-file store directory (default ./llmberjack-data)
    LLMBERJACK_BIND          host:port for the service (default 127.0.0.1:8080)
    LLMBERJACK_LLM_BASE_URL  chat-completion endpoint base URL
    LLMBERJACK_MODEL         model name sent to the provider

A config file with flat TOML-style ``key = value`` lines (keys as above,
lowercase, without the prefix; ``#`` comments allowed) overrides the
environment.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import MalformedInput

DEFAULT_BIND = "127.0.0.1:8080"
DEFAULT_DATA_DIR = "llmberjack-data"
DEFAULT_MODEL = "default-chat-model"

_ENV_KEYS = {
    "api_key": "LLMBERJACK_API_KEY",
    "data_dir": "LLMBERJACK_DATA_DIR",
    "bind": "LLMBERJACK_BIND",
    "llm_base_url": "LLMBERJACK_LLM_BASE_URL",
    "model": "LLMBERJACK_MODEL",
}


@dataclass(frozen=True)
class Settings:
    api_key: str | None = None
    data_dir: str = DEFAULT_DATA_DIR
    bind: str = DEFAULT_BIND
    llm_base_url: str | None = None
    model: str = DEFAULT_MODEL
    cors_origin: str | None = None

    @property
    def host(self) -> str:
        return self.bind.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        try:
            return int(self.bind.rsplit(":", 1)[1])
        except (IndexError, ValueError):
            raise MalformedInput(f"bind must be host:port, got {self.bind!r}") from None


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` pairs; quotes around values are stripped."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise MalformedInput(f"{path}:{lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        values[key.strip()] = value
    return values


def load_settings(
    config_file: str | Path | None = None, env: dict[str, str] | None = None
) -> Settings:
    env = dict(os.environ if env is None else env)
    settings = Settings()
    overrides = {
        field: env[env_key] for field, env_key in _ENV_KEYS.items() if env.get(env_key)
    }
    if overrides:
        settings = replace(settings, **overrides)
    if config_file is not None:
        file_values = parse_config_file(config_file)
        known = {k: v for k, v in file_values.items() if k in Settings.__dataclass_fields__}
        unknown = set(file_values) - set(known)
        if unknown:
            raise MalformedInput(f"unknown config keys: {', '.join(sorted(unknown))}")
        settings = replace(settings, **known)
    return settings
