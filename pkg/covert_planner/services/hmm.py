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
Hidden Markov model service

Builds the policy-induced HMM over decision states s and nature states (s, a),
samples observation sequences along runs, and evaluates likelihoods with a
log-space forward recursion.
"""

import numpy as np
from scipy.special import logsumexp

from covert_planner.errors import ModelValidationError
from covert_planner.models.hmm import Hmm, ObsModel, ObsSequence, nature_index
from covert_planner.models.mdp import Mdp, Run, ValidationReport
from covert_planner.services.policy import Policy, as_policy_table

ROW_TOLERANCE = 1e-12


def validate_obs_model(obs: ObsModel) -> ValidationReport:
    """Every emission row must be a distribution"""
    report = ValidationReport()
    for name, table in (("state_emission", obs.state_emission),
                        ("action_emission", obs.action_emission)):
        if np.any(table < 0):
            report.violations.append(f"{name} has negative entries")
        sums = table.sum(axis=-1)
        for index in np.argwhere(np.abs(sums - 1.0) > ROW_TOLERANCE):
            report.violations.append(
                f"{name} row {tuple(int(i) for i in index)} sums to {sums[tuple(index)]:.6g}"
            )
    return report


def build_hmm(mdp: Mdp, policy: Policy, obs: ObsModel) -> Hmm:
    """
    Policy-induced HMM

    Decision state s moves to nature state (s, a) with probability pi(a|s);
    nature state (s, a) moves to decision state s' with probability P(s'|s,a).
    Decision states emit Obs(.|s), nature states Obs(.|s,a).

    Raises:
        ModelValidationError: MDP / observation model / policy dimension mismatch
    """
    n_states, n_actions = mdp.n_states, mdp.n_actions
    if obs.n_states != n_states or obs.n_actions != n_actions:
        raise ModelValidationError(
            f"observation model covers (S, A) = ({obs.n_states}, {obs.n_actions}) "
            f"but the MDP has ({n_states}, {n_actions})"
        )
    table = as_policy_table(policy, n_states, n_actions)

    n_nature = n_states * n_actions
    size = n_states + n_nature
    transition = np.zeros((size, size))
    nature = nature_index(n_states, n_actions, np.arange(n_states)[:, None], np.arange(n_actions))
    transition[np.arange(n_states)[:, None], nature] = table
    transition[n_states:, :n_states] = mdp.transition.reshape(n_nature, n_states)

    emission = np.vstack([obs.state_emission, obs.action_emission.reshape(n_nature, obs.n_symbols)])
    initial = np.zeros(size)
    initial[mdp.initial_state] = 1.0
    return Hmm(
        transition=transition,
        emission=emission,
        initial=initial,
        n_decision=n_states,
        n_actions=n_actions,
    )


def sample_observation(obs: ObsModel, run: Run, rng: np.random.Generator) -> ObsSequence:
    """
    Emit one symbol per decision state and one per nature state along the run

    The result has 2T + 1 symbols for a run of T actions.
    """
    symbols = []
    for state, action in zip(run.states[:-1], run.actions):
        symbols.append(rng.choice(obs.n_symbols, p=obs.state_emission[state]))
        symbols.append(rng.choice(obs.n_symbols, p=obs.action_emission[state, action]))
    symbols.append(rng.choice(obs.n_symbols, p=obs.state_emission[run.states[-1]]))
    return ObsSequence(np.asarray(symbols, dtype=np.int64))


def _log_matvec(log_alpha: np.ndarray, transition: np.ndarray) -> np.ndarray:
    """log(exp(log_alpha) @ transition) with a max shift (log-sum-exp per column)"""
    shift = np.max(log_alpha)
    if not np.isfinite(shift):
        return np.full(transition.shape[1], -np.inf)
    with np.errstate(divide="ignore"):
        return shift + np.log(np.exp(log_alpha - shift) @ transition)


def forward_log_messages(hmm: Hmm, y: ObsSequence) -> np.ndarray:
    """
    Log-space forward messages

    Returns:
        array of shape (|y|, n_states) with log P(o_0..o_t, state_t = i)
    """
    symbols = y.symbols
    if symbols.size and (symbols.min() < 0 or symbols.max() >= hmm.n_symbols):
        raise ModelValidationError("observation symbol outside the HMM alphabet")
    messages = np.empty((symbols.size, hmm.n_states))
    if not symbols.size:
        return messages
    messages[0] = hmm.log_initial + hmm.log_emission[:, symbols[0]]
    for t in range(1, symbols.size):
        messages[t] = _log_matvec(messages[t - 1], hmm.transition) + hmm.log_emission[:, symbols[t]]
    return messages


def _log_total(messages: np.ndarray) -> np.ndarray:
    """log-sum-exp over the state axis; -inf for impossible prefixes"""
    with np.errstate(divide="ignore"):
        return logsumexp(messages, axis=-1)


def log_likelihood(hmm: Hmm, y: ObsSequence) -> float:
    """
    ln P(y; hmm) by the forward algorithm

    Returns -inf when y has zero probability. An empty sequence has
    probability 1.
    """
    if not len(y):
        return 0.0
    messages = forward_log_messages(hmm, y)
    return float(_log_total(messages[-1]))


def prefix_log_likelihoods(hmm: Hmm, y: ObsSequence) -> np.ndarray:
    """ln P(o_0..o_n; hmm) for every prefix length n+1 of y"""
    messages = forward_log_messages(hmm, y)
    return _log_total(messages)
