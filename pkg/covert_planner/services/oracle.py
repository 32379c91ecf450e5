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
Exact oracles for small instances

Brute-force enumeration of runs and (run, observation) pairs, exact
expectations built on top of it, central finite differences and the
coin-MDP check comparing the best covert Markov policy with a finite-memory
one. Every blow-up guard is a hard error.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from covert_planner.errors import ConfigError, EnumerationLimitError
from covert_planner.models.hmm import Hmm, ObsModel, ObsSequence
from covert_planner.models.mdp import Mdp, PolicyParams, Run
from covert_planner.models.training import BatchSample
from covert_planner.services.detection import detection_indicators
from covert_planner.services.hmm import build_hmm
from covert_planner.services.policy import (
    Policy,
    as_policy_table,
    discounted_return,
    trajectory_log_prob,
)

ENUMERATION_LIMIT = 1_000_000


@dataclass
class EnumeratedEnsemble:
    """
    Exact distribution over runs (and optionally run/observation pairs)

    Runs that enter an absorbing state before the horizon end there, which
    keeps the ensemble a proper distribution.
    """
    entries: list[tuple[Run, float]] = field(default_factory=list)
    joint: Optional[list[tuple[Run, ObsSequence, float]]] = None

    @property
    def total_probability(self) -> float:
        return float(sum(p for _, p in self.entries))


def enumerate_runs(mdp: Mdp, theta: Policy, horizon: int,
                   limit: int = ENUMERATION_LIMIT) -> EnumeratedEnsemble:
    """
    All positive-probability runs up to `horizon` actions

    Raises:
        EnumerationLimitError: more than `limit` runs
    """
    table = as_policy_table(theta, mdp.n_states, mdp.n_actions)
    entries: list[tuple[Run, float]] = []
    stack = [((mdp.initial_state,), (), 1.0)]
    while stack:
        states, actions, probability = stack.pop()
        state = states[-1]
        if len(actions) == horizon or state in mdp.absorbing:
            entries.append((Run(states, actions), probability))
            if len(entries) > limit:
                raise EnumerationLimitError(f"more than {limit} runs at horizon {horizon}")
            continue
        for action in np.flatnonzero(table[state] > 0):
            for successor in np.flatnonzero(mdp.transition[state, action] > 0):
                stack.append((
                    states + (int(successor),),
                    actions + (int(action),),
                    probability * table[state, action] * mdp.transition[state, action, successor],
                ))
    entries.reverse()
    return EnumeratedEnsemble(entries=entries)


def _emission_support(obs: ObsModel, run: Run) -> list[list[tuple[int, float]]]:
    rows = []
    for state, action in zip(run.states[:-1], run.actions):
        rows.append(obs.state_emission[state])
        rows.append(obs.action_emission[state, action])
    rows.append(obs.state_emission[run.states[-1]])
    return [[(int(o), float(row[o])) for o in np.flatnonzero(row > 0)] for row in rows]


def enumerate_joint(mdp: Mdp, theta: Policy, obs: ObsModel, horizon: int,
                    limit: int = ENUMERATION_LIMIT) -> EnumeratedEnsemble:
    """
    All positive-probability (run, observation) pairs with joint probabilities

    Raises:
        EnumerationLimitError: more than `limit` pairs
    """
    ensemble = enumerate_runs(mdp, theta, horizon, limit)
    joint = []
    for run, probability in ensemble.entries:
        support = _emission_support(obs, run)
        size = math.prod(len(options) for options in support)
        if len(joint) + size > limit:
            raise EnumerationLimitError(f"more than {limit} run/observation pairs")
        for combination in itertools.product(*support):
            symbols = [o for o, _ in combination]
            emission = math.prod(p for _, p in combination)
            joint.append((run, ObsSequence(symbols), probability * emission))
    ensemble.joint = joint
    return ensemble


def batch_from_ensemble(ensemble: EnumeratedEnsemble, theta_t: Policy, mdp: Mdp,
                        discount: Optional[float] = None) -> BatchSample:
    """
    Turn an ensemble enumerated under theta_t into an exactly weighted batch

    Estimators evaluated on it return exact expectations.
    """
    if ensemble.joint is not None:
        items = ensemble.joint
    else:
        items = [(run, ObsSequence([]), p) for run, p in ensemble.entries]
    return BatchSample(
        pairs=[(run, y) for run, y, _ in items],
        anchor_log_probs=np.array([trajectory_log_prob(run, theta_t) for run, _, _ in items]),
        returns=np.array([discounted_return(run, mdp, discount) for run, _, _ in items]),
        sample_weights=np.array([p for _, _, p in items]),
    )


def exact_value(mdp: Mdp, theta: Policy, horizon: int, discount: Optional[float] = None) -> float:
    """E[discounted return] over all runs up to `horizon`"""
    ensemble = enumerate_runs(mdp, theta, horizon)
    return float(sum(p * discounted_return(run, mdp, discount) for run, p in ensemble.entries))


def exact_kl(mdp: Mdp, theta_t: Policy, theta: Policy, horizon: int) -> float:
    """KL(P_theta_t || P_theta) over runs up to `horizon`"""
    ensemble = enumerate_runs(mdp, theta_t, horizon)
    return float(sum(
        p * (trajectory_log_prob(run, theta_t) - trajectory_log_prob(run, theta))
        for run, p in ensemble.entries
    ))


def exact_detection_probability(
    mdp: Mdp,
    theta: Policy,
    obs: ObsModel,
    nominal_policy: Policy,
    epsilon: float,
    horizon: int,
) -> float:
    """Pr(ln P(y; M_theta) - ln P(y; M0) > epsilon) with y generated under theta"""
    ensemble = enumerate_joint(mdp, theta, obs, horizon)
    hmm_theta = build_hmm(mdp, theta, obs)
    hmm_0 = build_hmm(mdp, nominal_policy, obs)
    detected = detection_indicators([y for _, y, _ in ensemble.joint], hmm_theta, hmm_0, epsilon)
    return float(sum(p for (_, _, p), flag in zip(ensemble.joint, detected) if flag))


def enumerate_observations(n_symbols: int, length: int,
                           limit: int = ENUMERATION_LIMIT) -> list[ObsSequence]:
    """Every symbol sequence of the given length"""
    if n_symbols ** length > limit:
        raise EnumerationLimitError(f"{n_symbols}^{length} sequences exceed the limit {limit}")
    return [ObsSequence(symbols) for symbols in itertools.product(range(n_symbols), repeat=length)]


def path_sum_likelihood(hmm: Hmm, y: ObsSequence, limit: int = ENUMERATION_LIMIT) -> float:
    """P(y; hmm) by summing over every hidden state path (no recursion)"""
    n = len(y)
    if n == 0:
        return 1.0
    if hmm.n_states ** n > limit:
        raise EnumerationLimitError(f"{hmm.n_states}^{n} state paths exceed the limit {limit}")
    paths = np.array(list(itertools.product(range(hmm.n_states), repeat=n)))
    symbols = y.symbols
    weights = hmm.initial[paths[:, 0]] * np.prod(hmm.emission[paths, symbols], axis=1)
    if n > 1:
        weights = weights * np.prod(hmm.transition[paths[:, :-1], paths[:, 1:]], axis=1)
    return float(weights.sum())


def finite_difference_gradient(objective: Callable[[PolicyParams], float],
                               theta: PolicyParams, step: float = 1e-4) -> np.ndarray:
    """Central differences of `objective` in every coordinate of theta"""
    gradient = np.zeros(theta.shape)
    for index in np.ndindex(*theta.shape):
        bump = np.zeros(theta.shape)
        bump[index] = step
        gradient[index] = (objective(theta + bump) - objective(theta + (-bump))) / (2.0 * step)
    return gradient


# coin MDP: states 1, 2 and actions H(eads), T(ails)
COIN_STATES = ("1", "2")
COIN_ACTIONS = ("H", "T")
COIN_GRID_STEP = 1e-3


def coin_mdp() -> Mdp:
    """
    Two-state coin MDP

    H keeps state 1; T moves 1 -> 2; in state 2, H is a fair coin between the
    states and T stays. Entering (or staying in) state 1 pays 1.
    """
    transition = np.zeros((2, 2, 2))
    transition[0, 0, 0] = 1.0
    transition[0, 1, 1] = 1.0
    transition[1, 0] = (0.5, 0.5)
    transition[1, 1, 1] = 1.0
    reward = transition[:, :, 0].copy()
    return Mdp(transition=transition, reward=reward, initial_state=0, discount=0.95,
               state_names=COIN_STATES, action_names=COIN_ACTIONS)


def coin_markov_value(alpha: float | np.ndarray, beta: float | np.ndarray):
    """Two-step reward of the Markov policy pi(H|1) = alpha, pi(H|2) = beta"""
    return alpha ** 2 + alpha + (1.0 - alpha) * beta / 2.0


@dataclass
class CoinCheck:
    """Best covert Markov value versus the finite-memory policy's value"""
    rho: float
    best_markov_value: float
    finite_memory_value: float
    bound: float
    grid_value: float
    grid_maximizer: tuple[float, float]
    enumerated_value: float

    @property
    def gap(self) -> float:
        return self.finite_memory_value - self.best_markov_value


def coin_mdp_check(rho: float) -> CoinCheck:
    """
    Compare covert Markov and finite-memory values on the coin MDP

    A Markov policy stays covert only with pi(H|1)^2 <= rho. The best one takes
    alpha = sqrt(rho), beta = 1, while a finite-memory policy reaches 1 + rho.
    The closed form is confirmed by a grid search over (alpha, beta) and by
    run enumeration of the two-step undiscounted return.

    Raises:
        ConfigError: rho outside (0, 1)
    """
    if not 0.0 < rho < 1.0:
        raise ConfigError(f"rho must lie in (0, 1), got {rho}")
    alpha_star = math.sqrt(rho)
    best = float(coin_markov_value(alpha_star, 1.0))

    alphas = np.append(np.arange(0.0, alpha_star, COIN_GRID_STEP), alpha_star)
    betas = np.linspace(0.0, 1.0, int(round(1.0 / COIN_GRID_STEP)) + 1)
    values = coin_markov_value(alphas[:, None], betas[None, :])
    i, j = np.unravel_index(np.argmax(values), values.shape)

    policy = np.array([[alpha_star, 1.0 - alpha_star], [1.0, 0.0]])
    enumerated = exact_value(coin_mdp(), policy, horizon=2, discount=1.0)

    return CoinCheck(
        rho=rho,
        best_markov_value=best,
        finite_memory_value=1.0 + rho,
        bound=0.5 * (1.0 - alpha_star),
        grid_value=float(values[i, j]),
        grid_maximizer=(float(alphas[i]), float(betas[j])),
        enumerated_value=enumerated,
    )
