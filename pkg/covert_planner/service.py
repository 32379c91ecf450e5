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
Covert-Planner Core - Service Layer

Provides unified access to configuration and the workflow pipelines.
"""

from pathlib import Path
from typing import Optional

from loguru import logger

from covert_planner.config import ConfigManager, ExperimentConfig
from covert_planner.pipelines.covert_pg import CovertPgPipeline
from covert_planner.pipelines.evaluation import CrossEvaluationPipeline, EvaluationPipeline
from covert_planner.pipelines.verification import VerificationPipeline


class CovertPlannerCore:
    """
    Covert-Planner Core

    Usage:
        core = CovertPlannerCore()
        config = core.load_config(preset="mini-5x5", overrides=["seed=7"])
        result = core.train(config, output_dir="output/mini")
        checks = core.verify("theorem1")

    Architecture:
        CovertPlannerCore (this class)
          ├── config_manager (preset / file / override merging)
          └── pipelines
              ├── train       (covert policy gradient)
              ├── evaluate    (Monte Carlo summary of a policy file)
              ├── cross_eval  (policy x slip detection table)
              └── verify      (oracle property suites)
    """

    def __init__(self, config_manager: Optional[ConfigManager] = None):
        self.config_manager = config_manager or ConfigManager()
        self.pipelines = {
            "train": CovertPgPipeline(self),
            "evaluate": EvaluationPipeline(self),
            "cross_eval": CrossEvaluationPipeline(self),
            "verify": VerificationPipeline(self),
        }
        logger.debug(f"Pipelines registered: {', '.join(self.pipelines)}")

    def load_config(
        self,
        config_path: str | Path | None = None,
        preset: Optional[str] = None,
        overrides: Optional[list[str]] = None,
    ) -> ExperimentConfig:
        return self.config_manager.load(config_path, preset, overrides)

    def train(self, config: ExperimentConfig, **kwargs):
        return self.pipelines["train"](config=config, **kwargs)

    def evaluate(self, config: ExperimentConfig, policy_path: str | Path, **kwargs):
        return self.pipelines["evaluate"](config=config, policy_path=policy_path, **kwargs)

    def cross_evaluate(self, config: ExperimentConfig, policy_paths: list[str | Path], **kwargs):
        return self.pipelines["cross_eval"](config=config, policy_paths=policy_paths, **kwargs)

    def verify(self, suite: str = "all", **kwargs):
        return self.pipelines["verify"](suite=suite, **kwargs)
