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
Configuration loader - YAML / JSON

Handles loading and saving configuration and model files. JSON documents go
through the json module (which also accepts Infinity); everything else is read
with yaml.safe_load.
"""

import json
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from loguru import logger

from covert_planner.errors import ConfigError


def to_plain(value: Any) -> Any:
    """Tuples/sets to lists and numpy scalars/arrays to Python values for the dumpers"""
    if isinstance(value, dict):
        return {key: to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [to_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def load_structured(path: str | Path) -> Any:
    """
    Parse a JSON or YAML document

    Raises:
        ConfigError: missing file or parse failure
    """
    file = Path(path)
    if not file.exists():
        raise ConfigError(f"file not found: {path}")
    try:
        with open(file, "r", encoding="utf-8") as f:
            if file.suffix.lower() == ".json":
                return json.load(f)
            return yaml.safe_load(f)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        logger.error(f"Failed to parse {path}: {e}")
        raise ConfigError(f"cannot parse {path}: {e}") from e


def load_config_dict(config_path: str | Path | None) -> dict:
    """
    Load configuration from a YAML or JSON file

    Args:
        config_path: Path to config file (None means "no file")

    Returns:
        Configuration dictionary ({} when no file is given)
    """
    if config_path is None:
        return {}
    data = load_structured(config_path) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {config_path} must contain a mapping at the top level")
    logger.info(f"Configuration loaded from {config_path}")
    return data


def save_config_dict(config: dict, config_path: str | Path):
    """
    Save configuration to a YAML (or JSON, by suffix) file

    Args:
        config: Configuration dictionary
        config_path: Path to config file
    """
    path = Path(config_path)
    try:
        with open(path, "w", encoding="utf-8") as f:
            if path.suffix.lower() == ".json":
                json.dump(to_plain(config), f, indent=2)
            else:
                yaml.safe_dump(to_plain(config), f, allow_unicode=True,
                               default_flow_style=False, sort_keys=False)
        logger.info(f"Configuration saved to {config_path}")
    except OSError as e:
        logger.error(f"Failed to save config: {e}")
        raise
