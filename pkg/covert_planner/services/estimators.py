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
Lagrangian and gradient estimators

Every estimator averages over a BatchSample with its `sample_weights`, so the
same code yields Monte Carlo estimates (uniform 1/N weights) and exact
expectations (enumerated probabilities as weights).

Objective being ascended:
    L(theta, lambda) = V(theta) + lambda * (alpha - Pr_detect(theta)) - beta * KL(P_theta_t || P_theta)
"""

from typing import Optional

import numpy as np
from scipy.special import softmax

from covert_planner.models.hmm import Hmm
from covert_planner.models.mdp import PolicyParams, Run
from covert_planner.models.training import BatchSample
from covert_planner.services.detection import detection_indicators
from covert_planner.services.policy import policy_log_prob

# smallest normal double; beta stays strictly positive under endless halving
BETA_FLOOR = float(np.finfo(float).tiny)


def score_function(run: Run, theta: PolicyParams) -> np.ndarray:
    """
    sum_t grad_theta ln pi_theta(a_t|s_t)

    For the softmax, entry (s, a) accumulates 1{a = a_t} - pi(a|s_t) at every
    visit of s_t.
    """
    score = np.zeros(theta.shape)
    if not len(run):
        return score
    visited, taken = run.visited, run.taken
    probabilities = softmax(theta.theta[visited], axis=1)
    np.add.at(score, visited, -probabilities)
    np.add.at(score, (visited, taken), 1.0)
    return score


def _log_ratios(batch: BatchSample, theta: PolicyParams) -> np.ndarray:
    """ln P_theta(x_i) - ln P_theta_t(x_i), policy factors only"""
    current = np.array([policy_log_prob(run, theta) for run in batch.runs])
    return current - batch.anchor_log_probs


def _weights(batch: BatchSample, theta: PolicyParams, theta_t: PolicyParams,
             weight_clip: Optional[float]) -> np.ndarray:
    if theta is theta_t or np.array_equal(theta.theta, theta_t.theta):
        return np.ones(len(batch))
    weights = np.exp(_log_ratios(batch, theta))
    if weight_clip is not None:
        weights = np.minimum(weights, weight_clip)
    return weights


def importance_weight(run: Run, theta: PolicyParams, theta_t: PolicyParams,
                      weight_clip: Optional[float] = None) -> float:
    """P_theta(x) / P_theta_t(x) = prod_t pi_theta(a_t|s_t) / pi_theta_t(a_t|s_t)"""
    if np.array_equal(theta.theta, theta_t.theta):
        return 1.0
    weight = float(np.exp(policy_log_prob(run, theta) - policy_log_prob(run, theta_t)))
    return min(weight, weight_clip) if weight_clip is not None else weight


def _weighted_score_sum(batch: BatchSample, theta: PolicyParams, coefficients: np.ndarray) -> np.ndarray:
    """sum_i sample_weight_i * coefficient_i * score(x_i)"""
    gradient = np.zeros(theta.shape)
    factors = batch.sample_weights * coefficients
    for run, factor in zip(batch.runs, factors):
        if factor != 0.0:
            gradient += factor * score_function(run, theta)
    return gradient


def value_gradient(batch: BatchSample, theta: PolicyParams, theta_t: PolicyParams,
                   weight_clip: Optional[float] = None) -> np.ndarray:
    """(1/N) sum_i w_i * score(x_i) * R(x_i)"""
    weights = _weights(batch, theta, theta_t, weight_clip)
    return _weighted_score_sum(batch, theta, weights * batch.returns)


def kl_gradient(batch: BatchSample, theta: PolicyParams, theta_t: PolicyParams) -> np.ndarray:
    """-(1/N) sum_i score(x_i); gradient of KL(P_theta_t || P_theta) in theta"""
    del theta_t  # samples already come from the anchor
    return -_weighted_score_sum(batch, theta, np.ones(len(batch)))


def constraint_gradient(
    batch: BatchSample,
    theta: PolicyParams,
    theta_t: PolicyParams,
    hmm_theta: Hmm,
    hmm_0: Hmm,
    epsilon: float,
    weight_clip: Optional[float] = None,
) -> np.ndarray:
    """
    -(1/N) sum_i 1{y_i detected} * w_i * score(x_i)

    Detection is judged with `hmm_theta`, the HMM of the current theta.
    """
    detected = detection_indicators(batch.observations, hmm_theta, hmm_0, epsilon,
                                    nominal_log_likelihoods=batch.nominal_log_likelihoods)
    if not detected.any():
        return np.zeros(theta.shape)
    weights = _weights(batch, theta, theta_t, weight_clip)
    return -_weighted_score_sum(batch, theta, detected * weights)


def primal_gradient(value_grad: np.ndarray, constraint_grad: np.ndarray, kl_grad: np.ndarray,
                    lam: float, beta: float) -> np.ndarray:
    """grad_theta L = value_grad + lambda * constraint_grad - beta * kl_grad"""
    return value_grad + lam * constraint_grad - beta * kl_grad


def value_estimate(batch: BatchSample, theta: PolicyParams, theta_t: PolicyParams,
                   weight_clip: Optional[float] = None) -> float:
    """Importance-weighted mean discounted return of theta"""
    weights = _weights(batch, theta, theta_t, weight_clip)
    return float(np.sum(batch.sample_weights * weights * batch.returns))


def kl_estimate(batch: BatchSample, theta: PolicyParams, theta_t: PolicyParams) -> float:
    """(1/N) sum_i [ln P_theta_t(x_i) - ln P_theta(x_i)]"""
    if np.array_equal(theta.theta, theta_t.theta):
        return 0.0
    return float(np.sum(batch.sample_weights * -_log_ratios(batch, theta)))


def lagrangian_value(value_est: float, detection_est: float, kl_est: float,
                     lam: float, alpha: float, beta: float) -> float:
    """value + lambda * (alpha - detection) - beta * KL"""
    return value_est + lam * (alpha - detection_est) - beta * kl_est


def dual_gradient(detection_est: float, alpha: float) -> float:
    """grad_lambda L = alpha - detection"""
    return alpha - detection_est


def update_lambda(lam: float, kappa: float, grad: float) -> float:
    """Projected step (lambda - kappa * grad)^+; grows while detection exceeds alpha"""
    return max(0.0, lam - kappa * grad)


def update_beta(beta: float, kl_est: float, d: float) -> float:
    """Halve below d/1.5 (never under BETA_FLOOR), double above 1.5*d, keep otherwise"""
    if kl_est <= d / 1.5:
        return max(beta / 2.0, BETA_FLOOR)
    if kl_est >= 1.5 * d:
        return beta * 2.0
    return beta
