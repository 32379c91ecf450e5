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
Gridworld environment construction

Slip dynamics with bouncing walls, terrain-aware multi-sensor observation
models and the config-to-spec translation for ASCII maps.
"""

import itertools
from dataclasses import replace
from typing import Literal

import numpy as np
from loguru import logger

from covert_planner.config.schema import GridConfig
from covert_planner.errors import ModelValidationError
from covert_planner.models.grid import Cell, GridSpec, Sensor
from covert_planner.models.hmm import ObsModel
from covert_planner.models.mdp import Mdp

ACTIONS = ("N", "E", "S", "W")

_MOVES = {"N": (-1, 0), "E": (0, 1), "S": (1, 0), "W": (0, -1)}

# lateral slip directions per intended action
_LATERALS = {"N": ("W", "E"), "S": ("W", "E"), "E": ("N", "S"), "W": ("N", "S")}


def cell_name(cell: Cell) -> str:
    return f"({cell[0]},{cell[1]})"


def cell_index(spec: GridSpec) -> dict[Cell, int]:
    """Open cell -> MDP state index"""
    return {cell: i for i, cell in enumerate(spec.open_cells)}


def _step(spec: GridSpec, cell: Cell, direction: str) -> Cell:
    """Deterministic component move; blocked moves stay in place"""
    dr, dc = _MOVES[direction]
    target = (cell[0] + dr, cell[1] + dc)
    if not spec.in_bounds(target) or target in spec.walls:
        return cell
    return target


def move_distribution(spec: GridSpec, cell: Cell, action: str) -> dict[Cell, float]:
    """P(.|cell, action): intended move 1 - 2*slip, each lateral slip"""
    outcomes: dict[Cell, float] = {}
    left, right = _LATERALS[action]
    for direction, p in ((action, 1.0 - 2.0 * spec.slip_beta),
                         (left, spec.slip_beta), (right, spec.slip_beta)):
        if p <= 0.0:
            continue
        target = _step(spec, cell, direction)
        outcomes[target] = outcomes.get(target, 0.0) + p
    return outcomes


def build_gridworld(spec: GridSpec, goal: Literal["agent", "user"] = "agent") -> Mdp:
    """
    Gridworld MDP for the agent's (or the user's) goal

    R(s,a) = -action_cost + E[-penalty * 1{enter penalty cell}
                              + goal_reward * 1{enter goal}]
    where "enter" means moving into the cell from a different one. The goal
    cell is absorbing with a self-loop.

    Raises:
        ModelValidationError: goal="user" on a map without a user goal
    """
    goal_cell = spec.agent_goal if goal == "agent" else spec.user_goal
    if goal_cell is None:
        raise ModelValidationError("grid has no user goal; cannot build the user's MDP")

    index = cell_index(spec)
    n_states, n_actions = len(index), len(ACTIONS)
    transition = np.zeros((n_states, n_actions, n_states))
    reward = np.full((n_states, n_actions), -spec.action_cost)
    for cell, s in index.items():
        for a, action in enumerate(ACTIONS):
            if cell == goal_cell:
                transition[s, a, s] = 1.0
                continue
            for target, p in move_distribution(spec, cell, action).items():
                transition[s, a, index[target]] += p
                if target == cell:
                    continue
                if target in spec.penalty_cells:
                    reward[s, a] -= p * spec.penalty
                if target == goal_cell:
                    reward[s, a] += p * spec.goal_reward

    return Mdp(
        transition=transition,
        reward=reward,
        initial_state=index[spec.initial_cell],
        discount=spec.gamma,
        absorbing=frozenset({index[goal_cell]}),
        state_names=tuple(cell_name(c) for c in spec.open_cells),
        action_names=ACTIONS,
    )


def sensor_state_probability(sensor: Sensor, cell: Cell, spec: GridSpec) -> float:
    """
    Probability that `sensor` fires while the agent occupies `cell`

    base - decay * manhattan distance - terrain decrement, clamped to [0, 1]
    and 0 outside the coverage.
    """
    if cell not in sensor.range_cells:
        return 0.0
    distance = abs(cell[0] - sensor.location[0]) + abs(cell[1] - sensor.location[1])
    p = sensor.base_probability - spec.distance_decay * distance
    if cell in spec.dark_green:
        p -= spec.dark_green_decrement
    if cell in spec.light_green:
        p -= spec.light_green_decrement
    # rounding keeps 0.8 - 0.05 - 0.2 at exactly 0.55
    return round(min(1.0, max(0.0, p)), 12)


def build_sensor_obs_model(sensors: list[Sensor], spec: GridSpec) -> ObsModel:
    """
    Observer model over joint sensor readings

    Symbols are bit strings "o1o2...ok" (sensor 1 first) plus the null symbol
    emitted by every nature state. Sensors fire independently.

    Raises:
        ModelValidationError: no sensors or a sensor placed outside the grid
    """
    if not sensors:
        raise ModelValidationError("at least one sensor is required")
    for sensor in sensors:
        if not spec.in_bounds(sensor.location):
            raise ModelValidationError(f"sensor location {sensor.location} is out of bounds")

    readings = list(itertools.product((0, 1), repeat=len(sensors)))
    alphabet = tuple("".join(str(bit) for bit in reading) for reading in readings)
    cells = spec.open_cells
    fire = np.array([[sensor_state_probability(sensor, cell, spec) for sensor in sensors]
                     for cell in cells])
    bits = np.array(readings, dtype=float)
    # product of Bernoullis: prod_i p_i^b_i (1 - p_i)^(1 - b_i)
    state_emission = np.prod(
        np.where(bits[None, :, :] == 1.0, fire[:, None, :], 1.0 - fire[:, None, :]),
        axis=2,
    )
    return ObsModel.with_null_actions(alphabet, state_emission, len(ACTIONS))


def grid_spec_from_config(config: GridConfig) -> GridSpec:
    """Parse the ASCII map and constants into a GridSpec"""
    marks: dict[str, list[Cell]] = {}
    for r, row in enumerate(config.map):
        for c, symbol in enumerate(row):
            marks.setdefault(symbol, []).append((r, c))
    user = marks.get("U")
    return GridSpec(
        rows=len(config.map),
        cols=len(config.map[0]),
        initial_cell=marks["S"][0],
        agent_goal=marks["A"][0],
        user_goal=user[0] if user else None,
        walls=frozenset(marks.get("#", [])),
        penalty_cells=frozenset(marks.get("X", [])),
        dark_green=frozenset(marks.get("G", [])),
        light_green=frozenset(marks.get("g", [])),
        slip_beta=config.slip_beta,
        action_cost=config.action_cost,
        penalty=config.penalty,
        goal_reward=config.goal_reward,
        gamma=config.gamma,
        distance_decay=config.distance_decay,
        dark_green_decrement=config.dark_green_decrement,
        light_green_decrement=config.light_green_decrement,
    )


def sensors_from_config(config: GridConfig, spec: GridSpec) -> list[Sensor]:
    sensors = []
    for item in config.sensors:
        if item.coverage is not None:
            sensors.append(Sensor(location=item.location, range_cells=frozenset(item.coverage),
                                  base_probability=item.base_probability))
        else:
            sensors.append(Sensor.with_radius(item.location, item.radius, spec,
                                              base_probability=item.base_probability))
    logger.debug(f"Built {len(sensors)} sensors covering "
                 f"{len(set().union(*(s.range_cells for s in sensors)))} cells")
    return sensors


def with_slip(spec: GridSpec, slip_beta: float) -> GridSpec:
    """Same layout under different environment stochasticity"""
    return replace(spec, slip_beta=slip_beta)
