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
Covert-Planner Configuration System

Unified configuration management with Pydantic validation.

Usage:
    from covert_planner.config import config_manager

    config = config_manager.load(preset="mini-5x5", overrides=["seed=7"])
    eta = config.hyper.eta
"""
from .schema import (
    DetectionParams,
    EnvironmentConfig,
    EvaluationConfig,
    ExperimentConfig,
    GridConfig,
    HyperParams,
    NominalConfig,
    SensorConfig,
)
from .loader import load_config_dict, load_structured, save_config_dict
from .manager import ConfigManager, config_manager, deep_merge, parse_override

__all__ = [
    "DetectionParams",
    "EnvironmentConfig",
    "EvaluationConfig",
    "ExperimentConfig",
    "GridConfig",
    "HyperParams",
    "NominalConfig",
    "SensorConfig",
    "ConfigManager",
    "config_manager",
    "deep_merge",
    "parse_override",
    "load_config_dict",
    "load_structured",
    "save_config_dict",
]
