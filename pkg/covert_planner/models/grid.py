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
Gridworld environment models

Cells are (row, col) tuples with row 0 at the top of the ASCII map.
"""

from dataclasses import dataclass, field
from typing import Optional

from covert_planner.errors import ModelValidationError

Cell = tuple[int, int]


@dataclass(frozen=True)
class GridSpec:
    """
    Gridworld layout and reward constants

    slip_beta is the environment stochasticity: the intended move succeeds with
    probability 1 - 2*slip_beta and each lateral neighbour receives slip_beta.
    """
    rows: int
    cols: int
    initial_cell: Cell
    agent_goal: Cell
    user_goal: Optional[Cell] = None
    walls: frozenset[Cell] = frozenset()
    penalty_cells: frozenset[Cell] = frozenset()
    dark_green: frozenset[Cell] = frozenset()
    light_green: frozenset[Cell] = frozenset()
    slip_beta: float = 0.1
    action_cost: float = 0.2
    penalty: float = 2.0
    goal_reward: float = 20.0
    gamma: float = 0.95
    distance_decay: float = 0.05          # per unit of Manhattan distance
    dark_green_decrement: float = 0.2
    light_green_decrement: float = 0.1

    def __post_init__(self):
        for name in ("walls", "penalty_cells", "dark_green", "light_green"):
            object.__setattr__(self, name, frozenset(tuple(c) for c in getattr(self, name)))
        for name in ("initial_cell", "agent_goal", "user_goal"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(value))
        problems = self.problems()
        if problems:
            raise ModelValidationError("invalid grid spec: " + "; ".join(problems), problems)

    def problems(self) -> list[str]:
        problems = []
        if self.rows < 1 or self.cols < 1:
            problems.append(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        named = {"initial_cell": self.initial_cell, "agent_goal": self.agent_goal}
        if self.user_goal is not None:
            named["user_goal"] = self.user_goal
        for name, cell in named.items():
            if not self.in_bounds(cell):
                problems.append(f"{name} {cell} out of bounds")
            elif cell in self.walls:
                problems.append(f"{name} {cell} is a wall")
        for name in ("walls", "penalty_cells", "dark_green", "light_green"):
            outside = sorted(c for c in getattr(self, name) if not self.in_bounds(c))
            if outside:
                problems.append(f"{name} has out-of-bounds cells {outside}")
        overlap = self.walls & (self.penalty_cells | self.dark_green | self.light_green)
        if overlap:
            problems.append(f"walls overlap other cell sets at {sorted(overlap)}")
        if self.dark_green & self.light_green:
            problems.append("a cell cannot be both dark and light green")
        if not 0.0 <= self.slip_beta < 0.5:
            problems.append(f"slip_beta must lie in [0, 0.5), got {self.slip_beta}")
        if not 0.0 < self.gamma < 1.0:
            problems.append(f"gamma must lie in (0, 1), got {self.gamma}")
        return problems

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    @property
    def open_cells(self) -> list[Cell]:
        """Non-wall cells in row-major order (the MDP state order)"""
        return [
            (r, c) for r in range(self.rows) for c in range(self.cols)
            if (r, c) not in self.walls
        ]


@dataclass(frozen=True)
class Sensor:
    """A fixed sensor with explicit coverage cells"""
    location: Cell
    range_cells: frozenset[Cell] = field(default_factory=frozenset)
    base_probability: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "location", tuple(self.location))
        object.__setattr__(self, "range_cells", frozenset(tuple(c) for c in self.range_cells))
        if not 0.0 <= self.base_probability <= 1.0:
            raise ModelValidationError(
                f"sensor base_probability must lie in [0, 1], got {self.base_probability}"
            )

    @classmethod
    def with_radius(cls, location: Cell, radius: int, spec: GridSpec,
                    base_probability: float = 0.8) -> "Sensor":
        """Coverage = all in-bounds cells within Manhattan distance `radius`"""
        r0, c0 = location
        cells = {
            (r, c)
            for r in range(r0 - radius, r0 + radius + 1)
            for c in range(c0 - radius, c0 + radius + 1)
            if abs(r - r0) + abs(c - c0) <= radius and spec.in_bounds((r, c))
        }
        return cls(location=location, range_cells=frozenset(cells), base_probability=base_probability)
