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
MDP and observation-model file formats

MDP document:
    {"states": [...], "actions": [...],
     "transitions": [[s, a, s_next, p], ...],
     "initial_state": s, "rewards": [[s, a, r], ...],
     "gamma": 0.95, "absorbing": [...]}

Observation-model document:
    {"alphabet": [...],
     "state_emission": {state: [p_o for o in alphabet]} or [[...], ...],
     "action_emission": {"state,action": [...]}  (optional)}

States, actions and symbols may be given by name or by index. Missing action
emission rows fall back to the null-symbol convention.
"""

from pathlib import Path
from typing import Any, Sequence

import numpy as np
from loguru import logger

from covert_planner.config.loader import load_structured, save_config_dict
from covert_planner.errors import ModelValidationError
from covert_planner.models.hmm import NULL_SYMBOL, ObsModel
from covert_planner.models.mdp import Mdp
from covert_planner.services.hmm import validate_obs_model
from covert_planner.services.policy import validate_mdp


def _names(raw: Any, what: str) -> tuple[str, ...]:
    if isinstance(raw, int):
        return tuple(str(i) for i in range(raw))
    if isinstance(raw, list) and raw:
        return tuple(str(item) for item in raw)
    raise ModelValidationError(f"'{what}' must be a count or a non-empty list of names")


def lookup_index(value: Any, names: Sequence[str], what: str) -> int:
    text = str(value)
    if text in names:
        return names.index(text)
    if isinstance(value, int) and 0 <= value < len(names):
        return value
    raise ModelValidationError(f"unknown {what} '{value}'")


def mdp_from_dict(data: dict) -> Mdp:
    """
    Build and validate an MDP from its document form

    Raises:
        ModelValidationError: malformed document or invalid probabilities
    """
    try:
        states = _names(data["states"], "states")
        actions = _names(data["actions"], "actions")
        transition = np.zeros((len(states), len(actions), len(states)))
        for s, a, t, p in data["transitions"]:
            transition[lookup_index(s, states, "state"), lookup_index(a, actions, "action"),
                       lookup_index(t, states, "state")] += float(p)
        reward = np.zeros((len(states), len(actions)))
        for s, a, r in data.get("rewards", []):
            reward[lookup_index(s, states, "state"), lookup_index(a, actions, "action")] = float(r)
        mdp = Mdp(
            transition=transition,
            reward=reward,
            initial_state=lookup_index(data["initial_state"], states, "state"),
            discount=float(data["gamma"]),
            absorbing=frozenset(lookup_index(s, states, "state") for s in data.get("absorbing", [])),
            state_names=states,
            action_names=actions,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ModelValidationError(f"malformed MDP document: {e}") from e
    validate_mdp(mdp).raise_if_invalid("MDP")
    return mdp


def mdp_to_dict(mdp: Mdp) -> dict:
    """Inverse of mdp_from_dict (zero-probability transitions are omitted)"""
    transitions = [
        [mdp.state_names[s], mdp.action_names[a], mdp.state_names[t], float(mdp.transition[s, a, t])]
        for s, a, t in np.argwhere(mdp.transition > 0)
    ]
    rewards = [
        [mdp.state_names[s], mdp.action_names[a], float(mdp.reward[s, a])]
        for s, a in np.argwhere(mdp.reward != 0)
    ]
    return {
        "states": list(mdp.state_names),
        "actions": list(mdp.action_names),
        "transitions": transitions,
        "initial_state": mdp.state_names[mdp.initial_state],
        "rewards": rewards,
        "gamma": mdp.discount,
        "absorbing": [mdp.state_names[s] for s in sorted(mdp.absorbing)],
    }


def load_mdp(path: str | Path) -> Mdp:
    """Load and validate an MDP file"""
    mdp = mdp_from_dict(load_structured(path))
    logger.info(f"Loaded MDP from {path}: {mdp.n_states} states, {mdp.n_actions} actions")
    return mdp


def dump_mdp(mdp: Mdp, path: str | Path):
    """Write an MDP file readable by load_mdp"""
    save_config_dict(mdp_to_dict(mdp), path)
    logger.info(f"MDP written to {path}")


def _rows(raw: Any, keys: Sequence[str], width: int, what: str) -> dict[str, list[float]]:
    if isinstance(raw, list):
        if len(raw) != len(keys):
            raise ModelValidationError(f"{what} needs {len(keys)} rows, got {len(raw)}")
        raw = dict(zip(keys, raw))
    rows = {}
    for key, row in raw.items():
        if len(row) != width:
            raise ModelValidationError(f"{what} row '{key}' needs {width} entries, got {len(row)}")
        rows[str(key)] = [float(p) for p in row]
    return rows


def obs_model_from_dict(data: dict, mdp: Mdp) -> ObsModel:
    """
    Build and validate an observation model for `mdp`

    Raises:
        ModelValidationError: malformed document or rows that are not distributions
    """
    try:
        alphabet = tuple(str(o) for o in data["alphabet"])
        state_rows = _rows(data["state_emission"], mdp.state_names, len(alphabet), "state_emission")
        state_emission = np.zeros((mdp.n_states, len(alphabet)))
        for key, row in state_rows.items():
            state_emission[lookup_index(key, mdp.state_names, "state")] = row
        if "action_emission" not in data:
            obs = ObsModel.with_null_actions(alphabet, state_emission, mdp.n_actions)
        else:
            action_emission = np.zeros((mdp.n_states, mdp.n_actions, len(alphabet)))
            if NULL_SYMBOL in alphabet:
                action_emission[:, :, alphabet.index(NULL_SYMBOL)] = 1.0
            for key, row in data["action_emission"].items():
                s, a = str(key).split(",")
                s_index = lookup_index(s.strip(), mdp.state_names, "state")
                a_index = lookup_index(a.strip(), mdp.action_names, "action")
                if len(row) != len(alphabet):
                    raise ModelValidationError(f"action_emission row '{key}' has the wrong width")
                action_emission[s_index, a_index] = [float(p) for p in row]
            obs = ObsModel(alphabet=alphabet, state_emission=state_emission,
                           action_emission=action_emission)
    except (KeyError, TypeError, ValueError) as e:
        raise ModelValidationError(f"malformed observation model: {e}") from e
    validate_obs_model(obs).raise_if_invalid("observation model")
    return obs


def load_obs_model(path: str | Path, mdp: Mdp) -> ObsModel:
    """Load and validate an observation-model file for `mdp`"""
    obs = obs_model_from_dict(load_structured(path), mdp)
    logger.info(f"Loaded observation model from {path}: {obs.n_symbols} symbols")
    return obs
