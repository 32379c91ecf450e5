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

from covert_planner.config.schema import DetectionParams, HyperParams
from covert_planner.errors import TrainerAbort
from covert_planner.services import trainer
from covert_planner.services.hmm import build_hmm, log_likelihood
from covert_planner.services.oracle import exact_value
from covert_planner.services.policy import soft_value_iteration
from covert_planner.services.trainer import run_covert_pg, sample_batch


def small_hyper(**overrides) -> HyperParams:
    values = dict(eta=0.05, kappa=0.01, lambda_init=1.0, beta_init=1.0, d=0.01, delta0=1e-9,
                  batches_m=2, trajectories_per_batch=8, horizon=6, max_outer_iterations=4)
    values.update(overrides)
    return HyperParams(**values)


@pytest.fixture
def nominal(chain_mdp):
    # the nominal user avoids the goal-bound action in state 1
    return soft_value_iteration(chain_mdp.with_reward(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])))


def test_sample_batch_caches_nominal_likelihoods(chain_mdp, chain_obs, nominal):
    hmm_0 = build_hmm(chain_mdp, nominal, chain_obs)
    theta = soft_value_iteration(chain_mdp)
    batch = sample_batch(chain_mdp, chain_obs, theta, 25, 6, np.random.default_rng(4), hmm_0)
    assert len(batch) == 25
    assert batch.sample_weights.sum() == pytest.approx(1.0)
    for y, cached in zip(batch.observations, batch.nominal_log_likelihoods):
        assert cached == pytest.approx(log_likelihood(hmm_0, y), abs=1e-12)


def test_sample_batch_without_nominal_model(chain_mdp, chain_obs):
    batch = sample_batch(chain_mdp, chain_obs, soft_value_iteration(chain_mdp), 3, 4,
                         np.random.default_rng(0))
    assert batch.nominal_log_likelihoods is None
    assert all(len(y) == 2 * len(run) + 1 for run, y in batch.pairs)


def test_same_seed_replays_the_trace(chain_mdp, chain_obs, nominal):
    detection = DetectionParams(epsilon=0.5, alpha=0.2)
    first = run_covert_pg(chain_mdp, chain_obs, nominal, detection, small_hyper(), seed=7)
    second = run_covert_pg(chain_mdp, chain_obs, nominal, detection, small_hyper(), seed=7)
    assert first.trace.rows == second.trace.rows
    np.testing.assert_array_equal(first.policy.theta, second.policy.theta)

    other = run_covert_pg(chain_mdp, chain_obs, nominal, detection, small_hyper(), seed=8)
    assert not np.array_equal(first.policy.theta, other.policy.theta)


def test_multipliers_stay_in_range(chain_mdp, chain_obs, nominal):
    hyper = small_hyper(max_outer_iterations=6, kappa=0.5, lambda_init=0.2)
    result = run_covert_pg(chain_mdp, chain_obs, nominal, DetectionParams(epsilon=0.5, alpha=0.1),
                           hyper, seed=1)
    lambdas = result.trace.column("lambda")
    betas = np.concatenate([[hyper.beta_init], result.trace.column("beta")])
    assert np.all(lambdas >= 0.0)
    assert set(np.round(betas[1:] / betas[:-1], 12)) <= {0.5, 1.0, 2.0}
    assert np.all(result.trace.column("kl") >= 0.0)
    assert np.all((result.trace.column("detection") >= 0) & (result.trace.column("detection") <= 1))
    assert result.lam == lambdas[-1]
    assert result.iterations == len(result.trace) == 6
    assert not result.converged


def test_starting_at_the_nominal_policy_is_undetected(chain_mdp, chain_obs, nominal):
    hyper = small_hyper(eta=1e-6, kappa=0.1, lambda_init=1.0, max_outer_iterations=3)
    result = run_covert_pg(chain_mdp, chain_obs, nominal, DetectionParams(epsilon=3.0, alpha=0.2),
                           hyper, seed=3, initial_theta=nominal)
    np.testing.assert_array_equal(result.trace.column("detection"), 0.0)
    np.testing.assert_allclose(result.trace.column("lambda"), [0.98, 0.96, 0.94])


def test_stops_once_the_lagrangian_settles(chain_mdp, chain_obs, nominal):
    hyper = small_hyper(eta=1e-9, delta0=1.0, max_outer_iterations=50)
    result = run_covert_pg(chain_mdp, chain_obs, nominal, DetectionParams(epsilon=3.0), hyper,
                           seed=0, initial_theta=nominal)
    assert result.converged
    assert result.iterations == 2


def test_non_finite_lagrangian_aborts(chain_mdp, chain_obs, nominal, monkeypatch):
    monkeypatch.setattr(trainer, "value_estimate", lambda *args, **kwargs: float("nan"))
    with pytest.raises(TrainerAbort, match="non-finite Lagrangian"):
        run_covert_pg(chain_mdp, chain_obs, nominal, DetectionParams(), small_hyper())


def test_progress_callback_sees_every_iteration(chain_mdp, chain_obs, nominal):
    events = []
    result = run_covert_pg(chain_mdp, chain_obs, nominal, DetectionParams(), small_hyper(),
                           progress_callback=events.append)
    assert [e.iteration for e in events] == list(range(1, result.iterations + 1))
    assert events[-1].event_type == "outer_iteration"
    assert events[-1].total == 4


@pytest.mark.slow
def test_unconstrained_training_keeps_the_soft_optimal_value(chain_mdp, chain_obs, nominal):
    hyper = small_hyper(lambda_init=0.0, horizon=4, batches_m=5, trajectories_per_batch=40,
                        max_outer_iterations=20, delta0=1e-6)
    result = run_covert_pg(chain_mdp, chain_obs, nominal, DetectionParams(alpha=1.0), hyper, seed=2)
    np.testing.assert_array_equal(result.trace.column("lambda"), 0.0)
    soft = exact_value(chain_mdp, soft_value_iteration(chain_mdp), 4)
    assert exact_value(chain_mdp, result.policy, 4) >= 0.95 * soft
