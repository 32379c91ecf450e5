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
Shared fixtures: small MDPs, observers and configs
"""

import numpy as np
import pytest

from covert_planner.config import ConfigManager
from covert_planner.models import Mdp, PolicyParams
from covert_planner.pipelines.verification import chain_problem, toy_problem


@pytest.fixture
def toy():
    """(mdp, obs) - two states, two actions, noisy two-symbol observer"""
    return toy_problem()


@pytest.fixture
def toy_theta():
    return PolicyParams(np.array([[0.4, -0.3], [-0.2, 0.5]]))


@pytest.fixture
def self_loop_mdp():
    """One state, two actions, both self-loops, reward 1 / 0"""
    transition = np.ones((1, 2, 1))
    reward = np.array([[1.0, 0.0]])
    return Mdp(transition=transition, reward=reward, initial_state=0, discount=0.5)


@pytest.fixture
def chain_mdp():
    """Three states; state 2 is an absorbing goal rewarded on entry"""
    return chain_problem()[0]


@pytest.fixture
def chain_obs():
    return chain_problem()[1]


@pytest.fixture
def mini_config():
    return ConfigManager().load(preset="mini-5x5")


@pytest.fixture
def tiny_overrides(tmp_path):
    """Overrides that shrink the mini preset to a few seconds of work"""
    return [
        "hyper.max_outer_iterations=2",
        "hyper.batches_m=2",
        "hyper.trajectories_per_batch=5",
        "hyper.horizon=10",
        "evaluation.samples=20",
        f"output_dir={tmp_path / 'run'}",
    ]
