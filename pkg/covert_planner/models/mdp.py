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
MDP data models

Dense-index tabular MDP, softmax policy parameters and sampled runs.
States and actions are integers 0..|S|-1 / 0..|A|-1; human-readable names
live in side tables for file I/O only.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from covert_planner.errors import ModelValidationError


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Mdp:
    """
    Finite MDP M = (S, A, P, s0, R, gamma) with absorbing states

    Attributes:
        transition: P(s'|s,a) with shape (|S|, |A|, |S|)
        reward: R(s,a) with shape (|S|, |A|)
        initial_state: s0
        discount: gamma, strictly inside (0, 1)
        absorbing: states on whose entry an episode terminates
        state_names / action_names: labels used by file formats and logs

    The constructor only checks table shapes; use
    `covert_planner.services.policy.validate_mdp` for the stochasticity report.
    """
    transition: np.ndarray
    reward: np.ndarray
    initial_state: int
    discount: float
    absorbing: frozenset[int] = frozenset()
    state_names: tuple[str, ...] = ()
    action_names: tuple[str, ...] = ()

    def __post_init__(self):
        transition = np.array(self.transition, dtype=float)
        reward = np.array(self.reward, dtype=float)
        if transition.ndim != 3 or transition.shape[0] != transition.shape[2]:
            raise ModelValidationError(
                f"transition must have shape (S, A, S), got {transition.shape}"
            )
        if reward.shape != transition.shape[:2]:
            raise ModelValidationError(
                f"reward shape {reward.shape} does not match (S, A) = {transition.shape[:2]}"
            )
        n_states, n_actions = reward.shape
        object.__setattr__(self, "transition", _frozen(transition))
        object.__setattr__(self, "reward", _frozen(reward))
        object.__setattr__(self, "initial_state", int(self.initial_state))
        object.__setattr__(self, "discount", float(self.discount))
        object.__setattr__(self, "absorbing", frozenset(int(s) for s in self.absorbing))
        if not self.state_names:
            object.__setattr__(self, "state_names", tuple(str(s) for s in range(n_states)))
        if not self.action_names:
            object.__setattr__(self, "action_names", tuple(str(a) for a in range(n_actions)))
        if len(self.state_names) != n_states or len(self.action_names) != n_actions:
            raise ModelValidationError("state/action name tables do not match table shapes")

    @property
    def n_states(self) -> int:
        return self.reward.shape[0]

    @property
    def n_actions(self) -> int:
        return self.reward.shape[1]

    def with_reward(self, reward: np.ndarray, absorbing: Optional[Sequence[int]] = None) -> "Mdp":
        """Same dynamics, different reward (and optionally absorbing set)"""
        return Mdp(
            transition=self.transition,
            reward=reward,
            initial_state=self.initial_state,
            discount=self.discount,
            absorbing=frozenset(self.absorbing if absorbing is None else absorbing),
            state_names=self.state_names,
            action_names=self.action_names,
        )


@dataclass(frozen=True)
class PolicyParams:
    """Softmax policy parameters theta, one real per (state, action)"""
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        if theta.ndim != 2:
            raise ModelValidationError(f"theta must be a 2-D table, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ModelValidationError("theta contains NaN or infinite entries")
        object.__setattr__(self, "theta", _frozen(theta))

    @property
    def shape(self) -> tuple[int, int]:
        return self.theta.shape

    @classmethod
    def zeros(cls, n_states: int, n_actions: int) -> "PolicyParams":
        return cls(np.zeros((n_states, n_actions)))

    def __add__(self, step: np.ndarray) -> "PolicyParams":
        return PolicyParams(self.theta + step)


@dataclass(frozen=True)
class Run:
    """
    A run x = s0 a0 s1 a1 ... sT

    `states` has T+1 entries and `actions` has T entries.
    """
    states: tuple[int, ...]
    actions: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(int(s) for s in self.states))
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if len(self.states) != len(self.actions) + 1:
            raise ModelValidationError(
                f"run needs one more state than actions, got {len(self.states)} states "
                f"and {len(self.actions)} actions"
            )

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def visited(self) -> np.ndarray:
        """Decision states s0..s_{T-1} (those where an action was drawn)"""
        return np.asarray(self.states[:-1], dtype=int)

    @property
    def taken(self) -> np.ndarray:
        return np.asarray(self.actions, dtype=int)


@dataclass
class ValidationReport:
    """Outcome of `validate_mdp` / `validate_obs_model`"""
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self, what: str = "model"):
        if self.violations:
            raise ModelValidationError(
                f"invalid {what}: " + "; ".join(self.violations[:5])
                + (f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""),
                violations=self.violations,
            )
