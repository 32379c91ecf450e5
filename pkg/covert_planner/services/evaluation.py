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
Monte Carlo policy evaluation

Discounted-return and detection-probability estimates with standard errors,
plus the baselines a covert policy is compared against.
"""

import math

import numpy as np
from loguru import logger

from covert_planner.models.hmm import ObsModel
from covert_planner.models.mdp import Mdp, PolicyParams
from covert_planner.models.training import EvaluationSummary
from covert_planner.services.detection import detection_indicators
from covert_planner.services.hmm import build_hmm, sample_observation
from covert_planner.services.policy import (
    Policy,
    discounted_return,
    hard_value_iteration,
    sample_trajectory,
)


def evaluate_policy(
    mdp: Mdp,
    obs: ObsModel,
    policy: Policy,
    nominal_policy: Policy,
    epsilon: float,
    n_samples: int,
    horizon: int,
    seed: int = 0,
    label: str = "",
) -> EvaluationSummary:
    """
    Sample n runs under `policy` and report value and detection with standard errors

    The detector knows the policy (M_theta is built from it) and compares it
    against M0 built from `nominal_policy` on the same MDP. Standard errors are
    sqrt(s^2 / n) with the population variance s^2.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    runs = [sample_trajectory(mdp, policy, horizon, rng) for _ in range(n_samples)]
    observations = [sample_observation(obs, run, rng) for run in runs]
    returns = np.array([discounted_return(run, mdp) for run in runs])
    detected = detection_indicators(
        observations, build_hmm(mdp, policy, obs), build_hmm(mdp, nominal_policy, obs), epsilon
    )
    p_hat = float(detected.mean())
    summary = EvaluationSummary(
        value_mean=float(returns.mean()),
        value_se=float(math.sqrt(returns.var() / n_samples)),
        detection_mean=p_hat,
        detection_se=math.sqrt(p_hat * (1.0 - p_hat) / n_samples),
        n_samples=n_samples,
        label=label,
    )
    logger.debug(
        f"Evaluated {label or 'policy'}: value {summary.value_mean:.3f} ± {summary.value_se:.3f}, "
        f"detection {summary.detection_mean:.3f} ± {summary.detection_se:.3f}"
    )
    return summary


def baseline_summary(
    mdp: Mdp,
    obs: ObsModel,
    nominal_policy: Policy,
    soft_optimal: PolicyParams,
    epsilon: float,
    n_samples: int,
    horizon: int,
    seed: int = 0,
) -> dict[str, EvaluationSummary]:
    """
    Value and detection of the deterministic and softmax optimal policies

    Both ignore the observer; they are logged next to the covert policy.
    """
    _, greedy = hard_value_iteration(mdp)
    baselines = {
        "deterministic_optimal": evaluate_policy(
            mdp, obs, greedy, nominal_policy, epsilon, n_samples, horizon, seed,
            label="deterministic_optimal",
        ),
        "softmax_optimal": evaluate_policy(
            mdp, obs, soft_optimal, nominal_policy, epsilon, n_samples, horizon, seed,
            label="softmax_optimal",
        ),
    }
    for name, summary in baselines.items():
        logger.info(
            f"Baseline {name}: value {summary.value_mean:.3f}, detection {summary.detection_mean:.3f}"
        )
    return baselines
