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
Experiment presets - predefined configurations

The 10x10 presets run the full-size gridworld (eta = 0.005, kappa = 0.01,
20 batches x 40 trajectories, epsilon = 3, alpha = 0.2, gamma = 0.95,
400 iterations, about a day each). Sensors sit at (4,0), (6,4) and (1,4), and
(6,3) is dark green. The agent's quickest route to (0,0) climbs the watched
left column past the user's goal (7,0); column 2 reaches the same cell
unwatched but crosses a penalty cell. `reference` holds the long-run
detection and value targets.

mini-5x5 is a ring of two equally long corridors from S to A: the left/top
one is watched by both sensors, the bottom/right one passes the user's goal
and a mild penalty cell. The soft-optimal agent prefers the watched corridor,
so training has to give up the penalty to stay covert.

Both use a policy temperature of 0.3; at 1.0 the entropy bonus outweighs
reaching a goal that ends the episode.
"""

import copy
from typing import Any, Dict, List

from covert_planner.errors import ConfigError

LARGE_MAP = [
    "A.........",
    ".#.#.g.#..",
    ".#.#.#.#..",
    ".#.#.#....",
    ".#X#.###..",
    ".#.#......",
    ".#.G......",
    "U#.###....",
    "..........",
    ".....S....",
]

LARGE_SENSORS = [
    {"location": [4, 0], "radius": 1},
    {"location": [6, 4], "radius": 1},
    {"location": [1, 4], "radius": 1},
]

MINI_MAP = [
    "G.g.A",
    ".###.",
    ".###X",
    ".###.",
    "S...U",
]

MINI_SENSORS = [
    {"location": [1, 0], "radius": 1},
    {"location": [0, 2], "radius": 1},
]

POLICY_TEMPERATURE = 0.3


def _large_grid_preset(name: str, slip: float, lambda_init: float, reference: dict) -> Dict[str, Any]:
    return {
        "name": name,
        "description": f"10x10 gridworld reconstruction, slip beta = {slip}",
        "reference": reference,
        "config": {
            "name": name,
            "environment": {
                "grid": {
                    "map": LARGE_MAP,
                    "slip_beta": slip,
                    "sensors": LARGE_SENSORS,
                },
            },
            "nominal": {"temperature": POLICY_TEMPERATURE, "goal": "user"},
            "detection": {"epsilon": 3.0, "alpha": 0.2},
            "hyper": {
                "eta": 0.005,
                "kappa": 0.01,
                "lambda_init": lambda_init,
                "beta_init": 1.0,
                "d": 0.01,
                "delta0": 1e-3,
                "batches_m": 20,
                "trajectories_per_batch": 40,
                "horizon": 100,
                "max_outer_iterations": 400,
            },
            "evaluation": {"samples": 1000, "slips": [0.05, 0.1, 0.15]},
        },
    }


EXPERIMENT_PRESETS: List[Dict[str, Any]] = [
    {
        "name": "mini-5x5",
        "description": "5x5 corridor ring with two sensors for desk-scale runs",
        "reference": {"detection_max": 0.25},
        "config": {
            "name": "mini-5x5",
            "environment": {
                "grid": {
                    "map": MINI_MAP,
                    "slip_beta": 0.05,
                    "penalty": 0.5,
                    "sensors": MINI_SENSORS,
                },
            },
            "nominal": {"temperature": POLICY_TEMPERATURE, "goal": "user"},
            "detection": {"epsilon": 3.0, "alpha": 0.2},
            "hyper": {
                "eta": 0.02,
                "kappa": 0.1,
                "lambda_init": 10.0,
                "beta_init": 1.0,
                "d": 0.05,
                "delta0": 1e-5,
                "batches_m": 10,
                "trajectories_per_batch": 40,
                "horizon": 30,
                "max_outer_iterations": 150,
            },
            "evaluation": {"samples": 2000, "slips": [0.05, 0.1, 0.15]},
        },
    },
    _large_grid_preset("paper-10x10-b005", 0.05, 40.0, {"detection": 0.168, "value": 6.3}),
    _large_grid_preset("paper-10x10-b010", 0.10, 10.0, {"detection": 0.089, "value": 5.1}),
    _large_grid_preset("paper-10x10-b015", 0.15, 10.0, {"detection": 0.088, "value": 3.47}),
]


def get_preset_names() -> List[str]:
    """Get list of preset names"""
    return [preset["name"] for preset in EXPERIMENT_PRESETS]


def get_preset(name: str) -> Dict[str, Any]:
    """
    Get a deep copy of the preset entry (name, description, reference, config)

    Raises:
        ConfigError: unknown preset name
    """
    for preset in EXPERIMENT_PRESETS:
        if preset["name"] == name:
            return copy.deepcopy(preset)
    raise ConfigError(f"unknown preset '{name}'. Available presets: {', '.join(get_preset_names())}")
