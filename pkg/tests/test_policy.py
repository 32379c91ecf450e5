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

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.special import logsumexp

from covert_planner.errors import ModelValidationError
from covert_planner.models import Mdp, PolicyParams, Run
from covert_planner.services.policy import (
    as_policy_table,
    discounted_return,
    hard_value_iteration,
    policy_log_prob,
    policy_probabilities,
    policy_table,
    run_log_probability,
    sample_trajectory,
    soft_value_iteration,
    trajectory_log_prob,
    validate_mdp,
)

finite_thetas = arrays(
    np.float64, (3, 4), elements=st.floats(-50, 50, allow_nan=False, allow_infinity=False)
)


@given(finite_thetas)
def test_softmax_rows_are_distributions(theta):
    table = policy_table(PolicyParams(theta))
    assert np.all(table >= 0)
    np.testing.assert_allclose(table.sum(axis=1), 1.0, atol=1e-12)


@given(finite_thetas, st.floats(-100, 100))
def test_softmax_is_shift_invariant(theta, shift):
    np.testing.assert_allclose(policy_table(PolicyParams(theta)),
                               policy_table(PolicyParams(theta + shift)), atol=1e-9)


def test_uniform_theta_gives_uniform_policy():
    assert policy_probabilities(PolicyParams.zeros(2, 4), 1) == pytest.approx([0.25] * 4)


def test_validate_mdp_reports_bad_rows(toy):
    mdp, _ = toy
    transition = mdp.transition.copy()
    transition[1, 0] = (0.6, 0.3)
    report = validate_mdp(Mdp(transition=transition, reward=mdp.reward, initial_state=0,
                              discount=0.9))
    assert not report.ok
    assert report.violations == ["row (1,0) sums to 0.9"]
    with pytest.raises(ModelValidationError) as excinfo:
        report.raise_if_invalid("MDP")
    assert excinfo.value.violations == report.violations


def test_validate_mdp_collects_every_problem():
    transition = np.array([[[1.2, -0.2]], [[0.0, 1.0]]])
    mdp = Mdp(transition=transition, reward=np.zeros((2, 1)), initial_state=5, discount=1.5,
              absorbing=frozenset({7}))
    text = " | ".join(validate_mdp(mdp).violations)
    assert "negative probability P(1|0,0)" in text
    assert "initial_state 5" in text
    assert "absorbing states [7]" in text
    assert "discount" in text


def test_valid_mdp_has_empty_report(toy):
    assert validate_mdp(toy[0]).ok


def test_mdp_rejects_mismatched_shapes():
    with pytest.raises(ModelValidationError):
        Mdp(transition=np.ones((2, 2, 2)) / 2, reward=np.zeros((3, 2)), initial_state=0,
            discount=0.9)


def test_policy_params_reject_nan():
    with pytest.raises(ModelValidationError):
        PolicyParams(np.array([[0.0, np.nan]]))


def test_explicit_policy_table_must_be_stochastic():
    with pytest.raises(ModelValidationError):
        as_policy_table(np.array([[0.5, 0.6]]), 1, 2)
    with pytest.raises(ModelValidationError):
        as_policy_table(PolicyParams.zeros(2, 2), 3, 2)


def test_discounted_return_geometric(self_loop_mdp):
    run = Run(states=(0, 0, 0, 0), actions=(0, 0, 0))
    assert discounted_return(run, self_loop_mdp) == pytest.approx(1.75)
    assert discounted_return(run, self_loop_mdp, discount=1.0) == pytest.approx(3.0)
    assert discounted_return(Run(states=(0,)), self_loop_mdp) == 0.0


def test_sample_trajectory_stops_on_absorbing_state(chain_mdp):
    rng = np.random.default_rng(0)
    theta = PolicyParams.zeros(3, 2)
    for _ in range(50):
        run = sample_trajectory(chain_mdp, theta, 200, rng)
        assert run.states[0] == chain_mdp.initial_state
        if len(run) < 200:
            assert run.states[-1] == 2
        assert 2 not in run.states[:-1]


def test_sample_trajectory_respects_horizon(self_loop_mdp):
    run = sample_trajectory(self_loop_mdp, PolicyParams.zeros(1, 2), 7, np.random.default_rng(1))
    assert len(run) == 7
    with pytest.raises(ValueError):
        sample_trajectory(self_loop_mdp, PolicyParams.zeros(1, 2), 0, np.random.default_rng(1))


def test_sampling_is_reproducible(toy, toy_theta):
    mdp, _ = toy
    first = sample_trajectory(mdp, toy_theta, 20, np.random.default_rng(42))
    second = sample_trajectory(mdp, toy_theta, 20, np.random.default_rng(42))
    assert first == second


def test_trajectory_log_prob_with_and_without_transitions(toy, toy_theta):
    mdp, _ = toy
    run = Run(states=(0, 1, 1), actions=(1, 0))
    table = policy_table(toy_theta)
    policy_only = np.log(table[0, 1] * table[1, 0])
    assert trajectory_log_prob(run, toy_theta) == pytest.approx(policy_only, abs=1e-12)
    assert policy_log_prob(run, toy_theta) == pytest.approx(policy_only, abs=1e-12)
    full = policy_only + np.log(0.7 * 0.5)
    assert trajectory_log_prob(run, toy_theta, mdp, include_transitions=True) == pytest.approx(full)
    assert run_log_probability(run, mdp, toy_theta) == pytest.approx(full)


def test_impossible_run_has_zero_probability(chain_mdp):
    run = Run(states=(0, 2), actions=(0,))
    assert run_log_probability(run, chain_mdp, PolicyParams.zeros(3, 2)) == float("-inf")


def test_hard_value_iteration_satisfies_bellman(toy):
    mdp, _ = toy
    values, greedy = hard_value_iteration(mdp)
    q = mdp.reward + mdp.discount * mdp.transition @ values
    np.testing.assert_allclose(values, q.max(axis=1), atol=1e-7)
    np.testing.assert_array_equal(greedy.argmax(axis=1), q.argmax(axis=1))
    np.testing.assert_array_equal(greedy.sum(axis=1), 1.0)


def test_soft_value_iteration_approaches_greedy_at_low_temperature(toy):
    mdp, _ = toy
    _, greedy = hard_value_iteration(mdp)
    soft = soft_value_iteration(mdp, temperature=1e-3)
    np.testing.assert_array_equal(policy_table(soft).argmax(axis=1), greedy.argmax(axis=1))


@settings(deadline=None, max_examples=20)
@given(st.floats(0.05, 50.0))
def test_soft_value_iteration_fixed_point(temperature):
    transition = np.array([
        [[0.8, 0.2], [0.3, 0.7]],
        [[0.5, 0.5], [0.1, 0.9]],
    ])
    mdp = Mdp(transition=transition, reward=np.array([[1.0, 0.0], [0.0, 2.0]]),
              initial_state=0, discount=0.9)
    theta = soft_value_iteration(mdp, temperature=temperature)
    q = theta.theta * temperature
    values = temperature * np.log(np.exp(theta.theta).sum(axis=1))
    np.testing.assert_allclose(q, mdp.reward + mdp.discount * transition @ values,
                               rtol=1e-6, atol=1e-6)


def test_soft_value_iteration_is_uniform_at_huge_temperature(toy):
    table = policy_table(soft_value_iteration(toy[0], temperature=1e6))
    np.testing.assert_allclose(table, 0.5, atol=1e-4)


def test_soft_value_iteration_stops_on_an_absolute_change(toy):
    # values near 2e4: a change relative to |V| would stop around 1e-5
    mdp = toy[0].with_reward(toy[0].reward * 1000.0)
    theta = soft_value_iteration(mdp, temperature=1.0)
    values = logsumexp(theta.theta, axis=1)
    np.testing.assert_allclose(theta.theta, mdp.reward + mdp.discount * mdp.transition @ values,
                               rtol=0.0, atol=1e-8)


def test_absorbing_states_have_no_continuation(chain_mdp):
    values, _ = hard_value_iteration(chain_mdp)
    # Q(1, a=1) = 0.8 + gamma * 0.2 * V(1); V(2) never enters
    assert values[1] == pytest.approx(0.8 / (1.0 - 0.9 * 0.2))
