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
Environment assembly

Turns an ExperimentConfig into the agent's MDP, the observer model, the
nominal policy defining M0 and the initial policy of the trainer.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger

from covert_planner.config.schema import ExperimentConfig
from covert_planner.errors import ConfigError
from covert_planner.models.grid import GridSpec, Sensor
from covert_planner.models.hmm import ObsModel
from covert_planner.models.mdp import Mdp, PolicyParams
from covert_planner.services.gridworld import (
    build_gridworld,
    build_sensor_obs_model,
    grid_spec_from_config,
    sensors_from_config,
    with_slip,
)
from covert_planner.services.model_io import load_mdp, load_obs_model, lookup_index
from covert_planner.services.policy import soft_value_iteration
from covert_planner.utils.os_util import resolve_path


@dataclass
class Environment:
    """Everything the trainer and evaluator need for one experiment"""
    mdp: Mdp
    obs: ObsModel
    nominal_policy: PolicyParams
    initial_theta: PolicyParams
    spec: Optional[GridSpec] = None
    sensors: list[Sensor] = field(default_factory=list)


def _file_nominal_reward(config: ExperimentConfig, mdp: Mdp) -> np.ndarray:
    records = config.nominal.rewards
    if records is None:
        return mdp.reward
    reward = np.zeros_like(mdp.reward)
    for s, a, r in records:
        s_index = lookup_index(s, mdp.state_names, "state")
        reward[s_index, lookup_index(a, mdp.action_names, "action")] = r
    return reward


def build_environment(config: ExperimentConfig, slip_beta: Optional[float] = None) -> Environment:
    """
    Build the experiment environment

    The nominal policy is the soft-optimal policy for the user's reward; the
    trainer starts from the soft-optimal policy for the agent's reward.
    `slip_beta` overrides the gridworld stochasticity (cross-evaluation).

    Raises:
        ConfigError: unusable environment section
    """
    temperature = config.nominal.temperature
    source = config.environment

    if source.grid is not None:
        spec = grid_spec_from_config(source.grid)
        if slip_beta is not None:
            spec = with_slip(spec, slip_beta)
        if config.nominal.goal == "user" and spec.user_goal is None:
            raise ConfigError("nominal.goal is 'user' but the map has no 'U' cell")
        sensors = sensors_from_config(source.grid, spec)
        mdp = build_gridworld(spec, goal="agent")
        obs = build_sensor_obs_model(sensors, spec)
        nominal_mdp = build_gridworld(spec, goal=config.nominal.goal)
        logger.info(
            f"Gridworld {spec.rows}x{spec.cols}: {mdp.n_states} states, {len(sensors)} sensors, "
            f"{obs.n_symbols} symbols, slip={spec.slip_beta}"
        )
    else:
        if slip_beta is not None:
            raise ConfigError("slip overrides only apply to gridworld environments")
        spec, sensors = None, []
        mdp = load_mdp(resolve_path(source.mdp_file))
        obs = load_obs_model(resolve_path(source.obs_file), mdp)
        nominal_mdp = mdp.with_reward(_file_nominal_reward(config, mdp))

    return Environment(
        mdp=mdp,
        obs=obs,
        nominal_policy=soft_value_iteration(nominal_mdp, temperature),
        initial_theta=soft_value_iteration(mdp, temperature),
        spec=spec,
        sensors=sensors,
    )
