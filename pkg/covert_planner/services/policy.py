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
MDP core operations

Softmax policies, trajectory sampling, discounted returns and value iteration
(entropy-regularised and standard) over dense tabular MDPs.
"""

from typing import Union

import numpy as np
from loguru import logger
from scipy.special import log_softmax, logsumexp, softmax

from covert_planner.errors import ConvergenceError, ModelValidationError
from covert_planner.models.mdp import Mdp, PolicyParams, Run, ValidationReport

Policy = Union[PolicyParams, np.ndarray]

ROW_TOLERANCE = 1e-12


def validate_mdp(mdp: Mdp) -> ValidationReport:
    """
    Check the stochasticity and index invariants of an MDP

    Returns:
        ValidationReport listing every violation (empty when the MDP is valid)
    """
    report = ValidationReport()
    negative = np.argwhere(mdp.transition < 0)
    for s, a, t in negative:
        report.violations.append(
            f"negative probability P({t}|{s},{a}) = {mdp.transition[s, a, t]:.6g}"
        )
    sums = mdp.transition.sum(axis=2)
    for s, a in np.argwhere(np.abs(sums - 1.0) > ROW_TOLERANCE):
        report.violations.append(f"row ({s},{a}) sums to {sums[s, a]:.6g}")
    if not 0 <= mdp.initial_state < mdp.n_states:
        report.violations.append(f"initial_state {mdp.initial_state} is not a state index")
    bad_absorbing = sorted(s for s in mdp.absorbing if not 0 <= s < mdp.n_states)
    if bad_absorbing:
        report.violations.append(f"absorbing states {bad_absorbing} are not state indices")
    if not 0.0 < mdp.discount < 1.0:
        report.violations.append(f"discount must lie in (0, 1), got {mdp.discount}")
    if not np.all(np.isfinite(mdp.reward)):
        report.violations.append("reward table contains non-finite entries")
    return report


def policy_probabilities(theta: PolicyParams, s: int) -> np.ndarray:
    """pi_theta(.|s) = softmax(theta[s]), computed with max-subtraction"""
    return softmax(theta.theta[s])


def policy_table(theta: PolicyParams) -> np.ndarray:
    """All softmax rows, shape (|S|, |A|)"""
    return softmax(theta.theta, axis=1)


def as_policy_table(policy: Policy, n_states: int, n_actions: int) -> np.ndarray:
    """
    Accept softmax parameters or an explicit stochastic table

    Raises:
        ModelValidationError: shape mismatch or rows that are not distributions
    """
    if isinstance(policy, PolicyParams):
        table = policy_table(policy)
    else:
        table = np.asarray(policy, dtype=float)
        if table.shape == (n_states, n_actions) and (
            np.any(table < 0) or np.any(np.abs(table.sum(axis=1) - 1.0) > 1e-9)
        ):
            raise ModelValidationError("explicit policy rows must be probability distributions")
    if table.shape != (n_states, n_actions):
        raise ModelValidationError(
            f"policy shape {table.shape} does not match MDP (S, A) = ({n_states}, {n_actions})"
        )
    return table


def policy_log_prob(run: Run, theta: PolicyParams) -> float:
    """sum_t ln pi_theta(a_t|s_t); transition factors are left out"""
    if not len(run):
        return 0.0
    log_pi = log_softmax(theta.theta, axis=1)
    return float(log_pi[run.visited, run.taken].sum())


def run_log_probability(run: Run, mdp: Mdp, policy: Policy) -> float:
    """Full ln P(x) including transitions; -inf for impossible runs"""
    table = as_policy_table(policy, mdp.n_states, mdp.n_actions)
    if run.states[0] != mdp.initial_state:
        return float("-inf")
    if not len(run):
        return 0.0
    nxt = np.asarray(run.states[1:], dtype=int)
    factors = table[run.visited, run.taken] * mdp.transition[run.visited, run.taken, nxt]
    with np.errstate(divide="ignore"):
        return float(np.log(factors).sum())


def trajectory_log_prob(run: Run, theta: Policy, mdp: Mdp | None = None,
                        include_transitions: bool = False) -> float:
    """
    ln P(x) under the policy, with or without the transition factors

    Policy-only log probabilities are what importance weights and KL
    estimates need, since the transition terms cancel in their ratios.
    """
    if include_transitions:
        if mdp is None:
            raise ValueError("include_transitions requires the MDP")
        return run_log_probability(run, mdp, theta)
    if isinstance(theta, PolicyParams):
        return policy_log_prob(run, theta)
    if not len(run):
        return 0.0
    with np.errstate(divide="ignore"):
        return float(np.log(np.asarray(theta)[run.visited, run.taken]).sum())


def sample_trajectory(mdp: Mdp, theta: Policy, horizon: int, rng: np.random.Generator) -> Run:
    """
    Sample a run under the policy

    Stops after `horizon` actions or on entering an absorbing state, whichever
    comes first. A run that starts in an absorbing state has length 0.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    table = as_policy_table(theta, mdp.n_states, mdp.n_actions)
    state = mdp.initial_state
    states = [state]
    actions = []
    if state in mdp.absorbing:
        return Run(states=tuple(states))
    for _ in range(horizon):
        action = int(rng.choice(mdp.n_actions, p=table[state]))
        state = int(rng.choice(mdp.n_states, p=mdp.transition[state, action]))
        actions.append(action)
        states.append(state)
        if state in mdp.absorbing:
            break
    return Run(states=tuple(states), actions=tuple(actions))


def discounted_return(run: Run, mdp: Mdp, discount: float | None = None) -> float:
    """sum_{t=0}^{T-1} gamma^t R(s_t, a_t)"""
    if not len(run):
        return 0.0
    gamma = mdp.discount if discount is None else discount
    rewards = mdp.reward[run.visited, run.taken]
    return float(np.dot(gamma ** np.arange(len(run)), rewards))


def _settled(delta: float, values: np.ndarray, tol: float) -> bool:
    """Absolute sup-norm test, floored at the float resolution of the values"""
    return delta < max(tol, 4.0 * float(np.spacing(np.max(np.abs(values)))))


def _continuation_mask(mdp: Mdp) -> np.ndarray:
    """1 for states whose value continues, 0 for absorbing (episode over)"""
    mask = np.ones(mdp.n_states)
    mask[list(mdp.absorbing)] = 0.0
    return mask


def soft_value_iteration(
    mdp: Mdp,
    temperature: float = 1.0,
    tol: float = 1e-9,
    max_sweeps: int = 100_000,
) -> PolicyParams:
    """
    Entropy-regularised value iteration

    Iterates V(s) = tau * logsumexp(Q(s,.)/tau) with
    Q = R + gamma * P (V on non-absorbing successors) until the sup-norm change
    drops below tol (absolute), then returns theta = Q / tau so that
    softmax(theta) is the soft-optimal policy.

    Raises:
        ConvergenceError: no fixed point within max_sweeps
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    mask = _continuation_mask(mdp)
    values = np.zeros(mdp.n_states)
    for sweep in range(1, max_sweeps + 1):
        q = mdp.reward + mdp.discount * (mdp.transition @ (values * mask))
        updated = temperature * logsumexp(q / temperature, axis=1)
        delta = float(np.max(np.abs(updated - values)))
        values = updated
        if _settled(delta, values, tol):
            logger.debug(f"Soft value iteration converged after {sweep} sweeps (tau={temperature})")
            break
    else:
        raise ConvergenceError(
            f"soft value iteration did not converge within {max_sweeps} sweeps (last change {delta:.3e})"
        )
    q = mdp.reward + mdp.discount * (mdp.transition @ (values * mask))
    return PolicyParams(q / temperature)


def hard_value_iteration(
    mdp: Mdp,
    tol: float = 1e-9,
    max_sweeps: int = 100_000,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Standard Bellman optimality iteration

    Returns:
        (state values, deterministic greedy policy table of shape (|S|, |A|))
    """
    mask = _continuation_mask(mdp)
    values = np.zeros(mdp.n_states)
    for _ in range(max_sweeps):
        q = mdp.reward + mdp.discount * (mdp.transition @ (values * mask))
        updated = q.max(axis=1)
        delta = float(np.max(np.abs(updated - values)))
        values = updated
        if _settled(delta, values, tol):
            break
    else:
        raise ConvergenceError(f"value iteration did not converge within {max_sweeps} sweeps")
    q = mdp.reward + mdp.discount * (mdp.transition @ (values * mask))
    greedy = np.zeros_like(q)
    greedy[np.arange(mdp.n_states), q.argmax(axis=1)] = 1.0
    return values, greedy
