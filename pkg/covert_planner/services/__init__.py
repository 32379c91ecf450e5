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
Covert-Planner Services

Core computations, each in its own module:
- policy:      MDP validation, softmax policies, sampling, value iteration
- hmm:         policy-induced HMMs and forward likelihoods
- detection:   likelihood ratios, SPRT and detection estimates
- estimators:  Lagrangian pieces and policy-gradient estimators
- trainer:     primal-dual proximal policy gradient
- gridworld:   slip gridworld and sensor observer
- oracle:      exact enumeration and finite-difference checks
- model_io:    MDP / observation-model files
- environment: config -> environment assembly
- evaluation:  Monte Carlo policy evaluation and baselines
- persistence: run artifacts on disk
"""

from covert_planner.services.environment import Environment, build_environment
from covert_planner.services.evaluation import baseline_summary, evaluate_policy
from covert_planner.services.persistence import PersistenceService
from covert_planner.services.trainer import run_covert_pg, sample_batch

__all__ = [
    "Environment",
    "build_environment",
    "baseline_summary",
    "evaluate_policy",
    "PersistenceService",
    "run_covert_pg",
    "sample_batch",
]
