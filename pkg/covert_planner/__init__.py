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
Covert-Planner - covert optimal planning under an HMM detector

Trains policies that maximise reward while keeping the probability that a
likelihood-ratio detector flags them below a tolerance.

Usage:
    from covert_planner import CovertPlannerCore

    core = CovertPlannerCore()
    config = core.load_config(preset="mini-5x5", overrides=["seed=7"])

    # Train (writes trace.csv, policy.json, summary.json to config.output_dir)
    result = core.train(config)
    print(result.trace.last.detection, result.lam)

    # Evaluate a saved policy, or run the oracle suites
    summary = core.evaluate(config, "output/policy.json", n_samples=2000)
    checks = core.verify("gradients")

Command line:
    covert-planner train --preset mini-5x5 --seed 7 --out output/mini
    covert-planner verify theorem1
"""

from covert_planner.config import config_manager
from covert_planner.service import CovertPlannerCore

__version__ = "0.1.0"

__all__ = ["CovertPlannerCore", "config_manager"]
