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
Configuration schema with Pydantic models

Single source of truth for all configuration defaults and validation.
Defaults follow the published gridworld experiment (eta = 0.005, kappa = 0.01,
20 batches x 40 trajectories, epsilon = 3, alpha = 0.2).
"""

import math
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class DetectionParams(BaseModel):
    """Detector thresholds and tolerated detection probability"""
    epsilon: float = Field(default=3.0, description="Lower SPRT threshold / detection threshold")
    beta_threshold: float = Field(default=math.inf, description="Upper SPRT threshold (unused by the planner)")
    alpha: float = Field(default=0.2, ge=0.0, le=1.0, description="Tolerated detection probability")

    @model_validator(mode="after")
    def _check_thresholds(self):
        if not self.epsilon < self.beta_threshold:
            raise ValueError(
                f"epsilon ({self.epsilon}) must be smaller than beta_threshold ({self.beta_threshold})"
            )
        return self


class HyperParams(BaseModel):
    """Primal-dual proximal policy-gradient hyperparameters"""
    eta: float = Field(default=0.005, gt=0, description="Primal (theta) learning rate")
    kappa: float = Field(default=0.01, gt=0, description="Dual (lambda) learning rate")
    lambda_init: float = Field(default=10.0, ge=0, description="Initial Lagrange multiplier")
    beta_init: float = Field(default=1.0, gt=0, description="Initial KL-penalty coefficient")
    d: float = Field(default=0.01, gt=0, description="KL target distance")
    delta0: float = Field(default=1e-3, gt=0, description="Stop when |change of L^beta| < delta0")
    batches_m: int = Field(default=20, ge=1, description="Primal updates per outer iteration")
    trajectories_per_batch: int = Field(default=40, ge=1, description="Trajectories per batch")
    horizon: int = Field(default=100, ge=1, description="Episode length cap")
    max_outer_iterations: int = Field(default=400, ge=1, description="Outer iteration cap")
    weight_clip: Optional[float] = Field(default=1e3, gt=0, description="Importance-weight clip (None disables)")


class NominalConfig(BaseModel):
    """How the nominal (null-hypothesis) policy is produced"""
    temperature: float = Field(default=1.0, gt=0, description="Soft value iteration temperature")
    goal: Literal["user", "agent"] = Field(
        default="user", description="Gridworld goal whose reward defines the nominal behaviour"
    )
    rewards: Optional[list[tuple[str | int, str | int, float]]] = Field(
        default=None, description="File-based environments: (s, a, r) records of the user's reward"
    )


class SensorConfig(BaseModel):
    """A gridworld sensor; coverage is explicit cells or a Manhattan radius"""
    location: tuple[int, int]
    coverage: Optional[list[tuple[int, int]]] = None
    radius: Optional[int] = Field(default=None, ge=0)
    base_probability: float = Field(default=0.8, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_coverage(self):
        if self.coverage is None and self.radius is None:
            raise ValueError("sensor needs either 'coverage' cells or a 'radius'")
        return self


class GridConfig(BaseModel):
    """
    ASCII-map gridworld

    Map legend: '#' wall, '.' open, 'X' penalty, 'g' light green, 'G' dark
    green, 'S' start, 'A' agent goal, 'U' user goal.
    """
    map: list[str] = Field(min_length=1)
    slip_beta: float = Field(default=0.1, ge=0.0, lt=0.5)
    action_cost: float = 0.2
    penalty: float = 2.0
    goal_reward: float = 20.0
    gamma: float = Field(default=0.95, gt=0.0, lt=1.0)
    distance_decay: float = Field(default=0.05, ge=0.0)
    dark_green_decrement: float = Field(default=0.2, ge=0.0)
    light_green_decrement: float = Field(default=0.1, ge=0.0)
    sensors: list[SensorConfig] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_map(self):
        widths = {len(row) for row in self.map}
        if len(widths) != 1:
            raise ValueError("all map rows must have the same width")
        text = "".join(self.map)
        unknown = set(text) - set("#.XgGSAU")
        if unknown:
            raise ValueError(f"unknown map symbols {sorted(unknown)}")
        for marker in "SA":
            if text.count(marker) != 1:
                raise ValueError(f"map must contain exactly one '{marker}'")
        if text.count("U") > 1:
            raise ValueError("map may contain at most one 'U'")
        return self


class EnvironmentConfig(BaseModel):
    """Either a gridworld or a pair of MDP / observation-model files"""
    grid: Optional[GridConfig] = None
    mdp_file: Optional[str] = None
    obs_file: Optional[str] = None

    @model_validator(mode="after")
    def _check_source(self):
        if self.grid is None and not (self.mdp_file and self.obs_file):
            raise ValueError("environment needs 'grid' or both 'mdp_file' and 'obs_file'")
        return self


class EvaluationConfig(BaseModel):
    """Monte Carlo evaluation settings"""
    samples: int = Field(default=1000, ge=1)
    slips: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.15])


class ExperimentConfig(BaseModel):
    """Covert-planner experiment configuration"""
    name: str = Field(default="experiment", description="Experiment name")
    preset: Optional[str] = Field(default=None, description="Preset the config was derived from")
    environment: EnvironmentConfig
    nominal: NominalConfig = Field(default_factory=NominalConfig)
    detection: DetectionParams = Field(default_factory=DetectionParams)
    hyper: HyperParams = Field(default_factory=HyperParams)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    seed: int = Field(default=0, ge=0)
    output_dir: str = Field(default="output")
    log_level: Literal["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR"] = "INFO"

    def to_dict(self) -> dict:
        """Convert to dictionary"""
        return self.model_dump()
