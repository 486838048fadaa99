"""Configuration plumbing shared by the CLI and the HTTP service.

Precedence: CLI flags > environment variables > config file > defaults.
The API key comes from CHATCHECK_API_KEY (or OPENAI_API_KEY as a
fallback); a JSON config file may override base_url, model, weights, and
the rest of the knobs below.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from typing import Optional, Tuple

from chatcheck.pipeline import Pipeline, PipelineConfig
from chatcheck.providers import OpenAICompatibleProvider, ProviderConfig, ScriptedProvider

ENV_API_KEY = "CHATCHECK_API_KEY"
ENV_API_KEY_FALLBACK = "OPENAI_API_KEY"
ENV_BASE_URL = "CHATCHECK_BASE_URL"
ENV_MODEL = "CHATCHECK_MODEL"


class ConfigError(Exception):
    """Unusable configuration (missing key, unreadable file, bad value)."""


@dataclass
class AppConfig:
    base_url: str = "https://api.openai.com/v1"
    api_key: str = ""
    model: str = "gpt-3.5-turbo"
    request_timeout: float = 30.0
    max_retries: int = 3
    weights: Optional[Tuple[float, float, float, float, float]] = None
    template_dir: Optional[str] = None
    initial_temperature: Optional[float] = None
    source_timeout: float = 5.0
    source_parallelism: int = 4
    follow_redirects: bool = True
    persist_path: Optional[str] = None
    cors_origins: Tuple[str, ...] = ("*",)
    transcript: Optional[str] = None  # path => scripted offline mode
    ui_dir: Optional[str] = None


def load_config(config_file: Optional[str] = None, overrides: Optional[dict] = None) -> AppConfig:
    """Merge defaults, config file, environment, and CLI overrides."""
    values: dict = {}

    if config_file:
        try:
            with open(config_file, "r", encoding="utf-8") as fp:
                file_values = json.load(fp)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {config_file}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {config_file} is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigError(f"config file {config_file} must hold a JSON object")
        known = {f.name for f in fields(AppConfig)}
        unknown = set(file_values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(file_values)

    env_key = os.environ.get(ENV_API_KEY) or os.environ.get(ENV_API_KEY_FALLBACK)
    if env_key:
        values["api_key"] = env_key
    if os.environ.get(ENV_BASE_URL):
        values["base_url"] = os.environ[ENV_BASE_URL]
    if os.environ.get(ENV_MODEL):
        values["model"] = os.environ[ENV_MODEL]

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    if "weights" in values and values["weights"] is not None:
        weights = values["weights"]
        if not isinstance(weights, (list, tuple)) or len(weights) != 5:
            raise ConfigError("weights must be a list of five numbers")
        values["weights"] = tuple(float(w) for w in weights)
    if "cors_origins" in values and not isinstance(values["cors_origins"], tuple):
        values["cors_origins"] = tuple(values["cors_origins"])

    return AppConfig(**values)


def build_provider(config: AppConfig):
    """Scripted provider when a transcript is configured, live otherwise."""
    if config.transcript:
        return ScriptedProvider.from_file(config.transcript)
    if not config.api_key:
        raise ConfigError(
            f"no API key configured for live mode: set {ENV_API_KEY} (or "
            f"{ENV_API_KEY_FALLBACK}), or pass --transcript for offline runs"
        )
    return OpenAICompatibleProvider(
        ProviderConfig(
            base_url=config.base_url,
            api_key=config.api_key,
            model=config.model,
            request_timeout=config.request_timeout,
            max_retries=config.max_retries,
        )
    )


def build_pipeline(config: AppConfig, provider=None) -> Pipeline:
    if provider is None:
        provider = build_provider(config)
    pipeline_config = PipelineConfig(
        model=config.model,
        weights=config.weights,
        initial_temperature=config.initial_temperature,
        source_timeout=config.source_timeout,
        source_parallelism=config.source_parallelism,
        follow_redirects=config.follow_redirects,
        template_dir=config.template_dir,
    )
    return Pipeline(provider, config=pipeline_config)
