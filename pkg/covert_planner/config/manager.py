# Copyright (C) 2025 Covert-Planner Contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#     http://www.apache.org/licenses/LICENSE-2.0
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Configuration Manager

Builds a validated ExperimentConfig from a preset, a config file and
dot-path overrides (deep-merged in that order).
"""

from pathlib import Path
from typing import Any, Optional

import yaml
from loguru import logger
from pydantic import ValidationError

from covert_planner.config.loader import load_config_dict, save_config_dict
from covert_planner.config.schema import ExperimentConfig
from covert_planner.errors import ConfigError
from covert_planner.presets import get_preset


def deep_merge(base: dict, updates: dict) -> dict:
    """Recursively merge `updates` into `base` (in place) and return it"""
    for key, value in updates.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            deep_merge(base[key], value)
        else:
            base[key] = value
    return base


def parse_override(text: str) -> dict:
    """
    Turn "hyper.eta=0.01" into {"hyper": {"eta": 0.01}}

    The value is parsed as YAML, so numbers, booleans and lists keep their type.
    """
    if "=" not in text:
        raise ConfigError(f"override '{text}' must look like key.path=value")
    path, raw = text.split("=", 1)
    keys = [key for key in path.strip().split(".") if key]
    if not keys:
        raise ConfigError(f"override '{text}' has an empty key path")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse override value in '{text}': {e}") from e
    nested: Any = value
    for key in reversed(keys):
        nested = {key: nested}
    return nested


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


class ConfigManager:
    """
    Configuration Manager

    Provides unified access to the experiment configuration with automatic
    validation.

    Usage:
        manager = ConfigManager()
        config = manager.load(preset="mini-5x5", overrides=["hyper.eta=0.01"])
    """

    def __init__(self):
        self.config_path: Optional[Path] = None
        self.preset: Optional[str] = None
        self.config: Optional[ExperimentConfig] = None

    def load(
        self,
        config_path: str | Path | None = None,
        preset: Optional[str] = None,
        overrides: Optional[list[str]] = None,
    ) -> ExperimentConfig:
        """
        Load, merge and validate

        Raises:
            ConfigError: unknown preset, unreadable file or invalid values
                (the message names the offending field path)
        """
        data: dict = {}
        file_data = load_config_dict(config_path)
        preset = preset or file_data.get("preset")
        if preset:
            data = get_preset(preset)["config"]
            data["preset"] = preset
        deep_merge(data, file_data)
        for override in overrides or []:
            deep_merge(data, parse_override(override))
        if not data:
            raise ConfigError("no configuration given: pass --config PATH or --preset NAME")

        self.config = self._validate(data)
        self.config_path = Path(config_path) if config_path else None
        self.preset = preset
        logger.debug(f"Configuration ready: {self.config.name} (preset={preset})")
        return self.config

    @staticmethod
    def _validate(data: dict) -> ExperimentConfig:
        try:
            return ExperimentConfig(**data)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration: {_describe(e)}") from e

    def update(self, updates: dict) -> ExperimentConfig:
        """
        Update configuration with new values

        Args:
            updates: Dictionary of updates (e.g., {"hyper": {"eta": 0.01}})
        """
        if self.config is None:
            raise ConfigError("no configuration loaded")
        merged = deep_merge(self.config.to_dict(), updates)
        self.config = self._validate(merged)
        return self.config

    def save(self, path: str | Path):
        """Save current configuration to file"""
        if self.config is None:
            raise ConfigError("no configuration loaded")
        save_config_dict(self.config.to_dict(), path)

    def get(self, key: str, default: Any = None) -> Any:
        """Dict-like access to top-level sections"""
        if self.config is None:
            return default
        return self.config.to_dict().get(key, default)


config_manager = ConfigManager()
