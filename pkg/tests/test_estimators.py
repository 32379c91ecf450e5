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

from covert_planner.models import BatchSample, ObsSequence, PolicyParams, Run
from covert_planner.services.estimators import (
    BETA_FLOOR,
    constraint_gradient,
    dual_gradient,
    importance_weight,
    kl_estimate,
    kl_gradient,
    lagrangian_value,
    primal_gradient,
    score_function,
    update_beta,
    update_lambda,
    value_estimate,
    value_gradient,
)
from covert_planner.pipelines.verification import CHAIN_HORIZON, chain_policies, separating_epsilon
from covert_planner.services.hmm import build_hmm
from covert_planner.services.oracle import (
    batch_from_ensemble,
    enumerate_joint,
    enumerate_runs,
    exact_detection_probability,
    exact_kl,
    exact_value,
    finite_difference_gradient,
)
from covert_planner.services.policy import policy_log_prob, run_log_probability
from covert_planner.services.trainer import sample_batch

HORIZON = 3


def single_run_batch(run, theta_t, ret=0.0):
    return BatchSample(pairs=[(run, ObsSequence([]))],
                       anchor_log_probs=[policy_log_prob(run, theta_t)], returns=[ret])


# ---------------------------------------------------------------- score / weights

def test_score_is_zero_with_a_single_action():
    run = Run(states=(0, 0, 0), actions=(0, 0))
    assert np.all(score_function(run, PolicyParams.zeros(1, 1)) == 0.0)


def test_score_at_symmetry():
    run = Run(states=(1, 0), actions=(0,))
    score = score_function(run, PolicyParams.zeros(2, 2))
    np.testing.assert_array_equal(score, [[0.0, 0.0], [0.5, -0.5]])


def test_score_matches_finite_differences(toy, toy_theta):
    run = Run(states=(0, 1, 1, 0, 0), actions=(1, 0, 1, 0))
    reference = finite_difference_gradient(lambda th: policy_log_prob(run, th), toy_theta)
    np.testing.assert_allclose(score_function(run, toy_theta), reference, atol=1e-6)


def test_importance_weight_identity(toy_theta):
    run = Run(states=(0, 1, 0), actions=(1, 1))
    assert importance_weight(run, toy_theta, toy_theta) == 1.0


def test_importance_weight_single_factor():
    theta = PolicyParams(np.log([[0.6, 0.4]]))
    theta_t = PolicyParams(np.log([[0.3, 0.7]]))
    run = Run(states=(0, 0), actions=(0,))
    assert importance_weight(run, theta, theta_t) == pytest.approx(2.0, rel=1e-12)
    assert importance_weight(run, theta, theta_t, weight_clip=1.5) == 1.5


def test_importance_weight_matches_full_trajectory_probabilities(toy, toy_theta):
    mdp, _ = toy
    theta_t = PolicyParams.zeros(2, 2)
    run = Run(states=(0, 1, 1, 0), actions=(1, 0, 0))
    expected = np.exp(run_log_probability(run, mdp, toy_theta) - run_log_probability(run, mdp, theta_t))
    assert importance_weight(run, toy_theta, theta_t) == pytest.approx(expected, rel=1e-10)


# ---------------------------------------------------------------- value gradient

def test_value_gradient_vanishes_without_reward(toy, toy_theta):
    mdp, obs = toy
    zero = mdp.with_reward(np.zeros((2, 2)))
    batch = sample_batch(zero, obs, toy_theta, 20, 5, np.random.default_rng(0))
    assert np.all(value_gradient(batch, toy_theta, toy_theta) == 0.0)


def test_value_gradient_single_sample_reduction(toy_theta):
    run = Run(states=(0, 1, 0), actions=(1, 0))
    batch = single_run_batch(run, toy_theta, ret=2.0)
    np.testing.assert_allclose(value_gradient(batch, toy_theta, toy_theta),
                               2.0 * score_function(run, toy_theta))


def test_exact_value_gradient_matches_finite_differences(toy, toy_theta):
    mdp, _ = toy
    batch = batch_from_ensemble(enumerate_runs(mdp, toy_theta, HORIZON), toy_theta, mdp)
    reference = finite_difference_gradient(lambda th: exact_value(mdp, th, HORIZON), toy_theta)
    estimate = value_gradient(batch, toy_theta, toy_theta)
    assert np.max(np.abs(estimate - reference)) <= 1e-3 * np.max(np.abs(reference))


def test_bandit_value_gradient(self_loop_mdp):
    theta = PolicyParams(np.array([[0.3, -0.1]]))
    batch = batch_from_ensemble(enumerate_runs(self_loop_mdp, theta, 1), theta, self_loop_mdp)
    p = np.exp(0.3) / (np.exp(0.3) + np.exp(-0.1))
    # V = p * 1, dV/dtheta = (p(1-p), -p(1-p))
    np.testing.assert_allclose(value_gradient(batch, theta, theta),
                               [[p * (1 - p), -p * (1 - p)]], atol=1e-12)


def test_off_anchor_value_gradient_is_importance_weighted(toy, toy_theta):
    mdp, _ = toy
    anchor = PolicyParams.zeros(2, 2)
    batch = batch_from_ensemble(enumerate_runs(mdp, anchor, HORIZON), anchor, mdp)
    on_policy = batch_from_ensemble(enumerate_runs(mdp, toy_theta, HORIZON), toy_theta, mdp)
    np.testing.assert_allclose(value_gradient(batch, toy_theta, anchor),
                               value_gradient(on_policy, toy_theta, toy_theta), atol=1e-12)
    assert value_estimate(batch, toy_theta, anchor) == pytest.approx(
        exact_value(mdp, toy_theta, HORIZON), abs=1e-12)


# ---------------------------------------------------------------- KL

def test_kl_gradient_expectation_vanishes_at_anchor(toy, toy_theta):
    mdp, _ = toy
    batch = batch_from_ensemble(enumerate_runs(mdp, toy_theta, HORIZON), toy_theta, mdp)
    assert np.max(np.abs(kl_gradient(batch, toy_theta, toy_theta))) <= 1e-12


def test_kl_gradient_single_action_is_zero():
    run = Run(states=(0, 0), actions=(0,))
    theta = PolicyParams.zeros(1, 1)
    assert np.all(kl_gradient(single_run_batch(run, theta), theta, theta) == 0.0)


def test_kl_gradient_matches_finite_differences(toy, toy_theta):
    mdp, _ = toy
    anchor = PolicyParams.zeros(2, 2)
    batch = batch_from_ensemble(enumerate_runs(mdp, anchor, HORIZON), anchor, mdp)
    reference = finite_difference_gradient(lambda th: exact_kl(mdp, anchor, th, HORIZON), toy_theta)
    np.testing.assert_allclose(kl_gradient(batch, toy_theta, anchor), reference, atol=1e-5)


def test_kl_estimate(toy, toy_theta):
    mdp, _ = toy
    anchor = PolicyParams.zeros(2, 2)
    batch = batch_from_ensemble(enumerate_runs(mdp, anchor, HORIZON), anchor, mdp)
    assert kl_estimate(batch, anchor, anchor) == 0.0
    assert kl_estimate(batch, toy_theta, anchor) == pytest.approx(
        exact_kl(mdp, anchor, toy_theta, HORIZON), abs=1e-12)
    assert kl_estimate(batch, toy_theta, anchor) > 0.0


@pytest.mark.slow
def test_monte_carlo_kl_within_three_standard_errors(toy, toy_theta):
    mdp, obs = toy
    anchor = PolicyParams.zeros(2, 2)
    exact = exact_kl(mdp, anchor, toy_theta, HORIZON)
    hits = 0
    for seed in range(20):
        batch = sample_batch(mdp, obs, anchor, 20_000, HORIZON, np.random.default_rng(seed))
        terms = batch.anchor_log_probs - np.array([policy_log_prob(r, toy_theta) for r in batch.runs])
        se = terms.std() / np.sqrt(len(terms))
        hits += abs(kl_estimate(batch, toy_theta, anchor) - exact) <= 3 * se
    # a 3-sigma band misses about 0.3% of the time; one miss in 20 is tolerated
    assert hits >= 19


# ---------------------------------------------------------------- constraint

@pytest.fixture
def joint_batch(toy, toy_theta):
    mdp, obs = toy
    return batch_from_ensemble(enumerate_joint(mdp, toy_theta, obs, HORIZON), toy_theta, mdp)


def test_constraint_gradient_without_detections_is_zero(toy, toy_theta, joint_batch):
    mdp, obs = toy
    hmm_theta = build_hmm(mdp, toy_theta, obs)
    hmm_0 = build_hmm(mdp, PolicyParams.zeros(2, 2), obs)
    gradient = constraint_gradient(joint_batch, toy_theta, toy_theta, hmm_theta, hmm_0, 1e6)
    assert np.all(gradient == 0.0)


def test_constraint_gradient_with_everything_detected(toy, toy_theta, joint_batch):
    mdp, obs = toy
    hmm_theta = build_hmm(mdp, toy_theta, obs)
    hmm_0 = build_hmm(mdp, PolicyParams.zeros(2, 2), obs)
    gradient = constraint_gradient(joint_batch, toy_theta, toy_theta, hmm_theta, hmm_0, -1e6)
    np.testing.assert_allclose(gradient, kl_gradient(joint_batch, toy_theta, toy_theta), atol=1e-15)


def test_constraint_gradient_uses_current_model(toy, toy_theta, joint_batch):
    mdp, obs = toy
    hmm_0 = build_hmm(mdp, PolicyParams.zeros(2, 2), obs)
    # judging with M0 itself: ratio 0 everywhere, nothing exceeds epsilon = 0
    gradient = constraint_gradient(joint_batch, toy_theta, toy_theta, hmm_0, hmm_0, 0.0)
    assert np.all(gradient == 0.0)


# ---------------------------------------------------------------- scalar pieces

def test_lagrangian_value():
    assert lagrangian_value(5.0, 0.7, 0.3, 0.0, 0.2, 0.0) == 5.0
    assert lagrangian_value(6.3, 0.168, 0.0, 1.0, 0.2, 0.0) == pytest.approx(6.332)
    assert lagrangian_value(4.0, 0.2, 0.5, 17.0, 0.2, 2.0) == pytest.approx(3.0)


def test_dual_gradient():
    assert dual_gradient(0.168, 0.2) == pytest.approx(0.032)
    assert dual_gradient(0.2, 0.2) == 0.0
    assert dual_gradient(0.73, 0.2) == pytest.approx(-0.53)


def test_update_lambda():
    assert update_lambda(10.0, 0.01, -0.53) == pytest.approx(10.0053)
    assert update_lambda(0.001, 0.01, 0.2) == 0.0
    assert update_lambda(3.0, 0.01, 0.0) == 3.0


def test_update_beta():
    d = 0.01
    assert update_beta(1.0, d, d) == 1.0
    assert update_beta(1.0, d / 2, d) == 0.5
    assert update_beta(1.0, 2 * d, d) == 2.0
    assert update_beta(1.0, -0.1, d) == 0.5


def test_beta_never_halves_to_zero():
    beta = 1.0
    for _ in range(2000):
        beta = update_beta(beta, 0.0, 0.05)
    assert beta == BETA_FLOOR > 0.0
    assert update_beta(beta, 1.0, 0.05) == 2 * BETA_FLOOR


def test_primal_gradient_reduces_to_vanilla_policy_gradient(toy, toy_theta):
    mdp, obs = toy
    anchor = PolicyParams.zeros(2, 2)
    batch = sample_batch(mdp, obs, anchor, 30, 6, np.random.default_rng(2))
    vg = value_gradient(batch, toy_theta, anchor)
    cg = np.full((2, 2), 7.0)
    kg = kl_gradient(batch, toy_theta, anchor)
    np.testing.assert_array_equal(primal_gradient(vg, cg, kg, 0.0, 0.0), vg)
    np.testing.assert_allclose(primal_gradient(vg, cg, kg, 2.0, 0.5), vg + 2.0 * cg - 0.5 * kg)


def test_weight_clip_bounds_the_value_estimate():
    anchor = PolicyParams(np.array([[-10.0, 10.0]]))
    theta = PolicyParams(np.array([[10.0, -10.0]]))
    batch = single_run_batch(Run(states=(0, 0), actions=(0,)), anchor, ret=1.0)
    assert value_estimate(batch, theta, anchor, weight_clip=1e3) == 1e3
    assert value_estimate(batch, theta, anchor) > 1e8


@pytest.mark.slow
def test_exact_constraint_gradient_on_a_three_state_chain(chain_mdp, chain_obs):
    theta, nominal = chain_policies()
    horizon = CHAIN_HORIZON
    batch = batch_from_ensemble(enumerate_joint(chain_mdp, theta, chain_obs, horizon), theta, chain_mdp)
    hmm_theta, hmm_0 = build_hmm(chain_mdp, theta, chain_obs), build_hmm(chain_mdp, nominal, chain_obs)
    epsilon = separating_epsilon(batch, hmm_theta, hmm_0)
    estimate = constraint_gradient(batch, theta, theta, hmm_theta, hmm_0, epsilon)
    reference = -finite_difference_gradient(
        lambda th: exact_detection_probability(chain_mdp, th, chain_obs, nominal, epsilon, horizon), theta
    )
    assert np.max(np.abs(estimate - reference)) <= 1e-3 * np.max(np.abs(reference))


def test_exact_value_gradient_on_a_three_state_chain(chain_mdp):
    theta, _ = chain_policies()
    batch = batch_from_ensemble(enumerate_runs(chain_mdp, theta, CHAIN_HORIZON), theta, chain_mdp)
    reference = finite_difference_gradient(lambda th: exact_value(chain_mdp, th, CHAIN_HORIZON), theta)
    estimate = value_gradient(batch, theta, theta)
    assert np.max(np.abs(estimate - reference)) <= 1e-3 * np.max(np.abs(reference))


def test_kl_gradient_on_a_three_state_chain(chain_mdp):
    theta, anchor = chain_policies()
    batch = batch_from_ensemble(enumerate_runs(chain_mdp, anchor, CHAIN_HORIZON), anchor, chain_mdp)
    reference = finite_difference_gradient(
        lambda th: exact_kl(chain_mdp, anchor, th, CHAIN_HORIZON), theta
    )
    estimate = kl_gradient(batch, theta, anchor)
    assert np.max(np.abs(estimate - reference)) <= 1e-3 * np.max(np.abs(reference))
    assert kl_estimate(batch, theta, anchor) == pytest.approx(
        exact_kl(chain_mdp, anchor, theta, CHAIN_HORIZON), abs=1e-12)
