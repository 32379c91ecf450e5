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
Detection service

Log-likelihood ratios between the policy-induced HMM M_theta and the nominal
HMM M0, the SPRT decision rule, the covertness detection condition and its
Monte Carlo probability estimate.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from covert_planner.config.schema import DetectionParams
from covert_planner.errors import DetectionSupportError
from covert_planner.models.hmm import Hmm, ObsSequence
from covert_planner.services.hmm import log_likelihood, prefix_log_likelihoods


class SprtDecision(str, Enum):
    """SPRT outcome"""
    ACCEPT_NULL = "accept_null"
    ACCEPT_ALTERNATIVE = "accept_alternative"
    CONTINUE = "continue"


@dataclass
class SprtOutcome:
    """Result of running the sequential test symbol by symbol"""
    decision: SprtDecision
    stopping_index: Optional[int]      # number of symbols consumed when stopping
    llr: float                         # log S_n at the stopping point (or at the end)


def _combine(log_theta: float, log_nominal: float) -> float:
    """ln P(y; M_theta) - ln P(y; M0) with the support conventions"""
    if log_theta == -math.inf and log_nominal == -math.inf:
        raise DetectionSupportError("observation outside both supports")
    if log_nominal == -math.inf:
        return math.inf
    if log_theta == -math.inf:
        return -math.inf
    return log_theta - log_nominal


def log_likelihood_ratio(y: ObsSequence, hmm_theta: Hmm, hmm_0: Hmm) -> float:
    """
    ln P(y; M_theta) - ln P(y; M0)

    +inf when only M0 rules y out (support leakage), -inf when only M_theta does.

    Raises:
        DetectionSupportError: y is impossible under both models
    """
    if hmm_theta.n_symbols != hmm_0.n_symbols:
        raise ValueError("both HMMs must share the observation alphabet")
    log_theta = log_likelihood(hmm_theta, y)
    log_nominal = log_theta if hmm_theta is hmm_0 else log_likelihood(hmm_0, y)
    return _combine(log_theta, log_nominal)


def sprt_decision(llr: float, params: DetectionParams) -> SprtDecision:
    """accept_null if llr <= epsilon, accept_alternative if llr >= beta_threshold"""
    if llr <= params.epsilon:
        return SprtDecision.ACCEPT_NULL
    if llr >= params.beta_threshold:
        return SprtDecision.ACCEPT_ALTERNATIVE
    return SprtDecision.CONTINUE


def is_detected(y: ObsSequence, hmm_theta: Hmm, hmm_0: Hmm, epsilon: float) -> bool:
    """Detection condition: ln P(y; M_theta) - ln P(y; M0) > epsilon (strict)"""
    return log_likelihood_ratio(y, hmm_theta, hmm_0) > epsilon


def prefix_log_likelihood_ratios(y: ObsSequence, hmm_theta: Hmm, hmm_0: Hmm) -> np.ndarray:
    """log S_n for every prefix o_0..o_n of y"""
    theta_prefix = prefix_log_likelihoods(hmm_theta, y)
    nominal_prefix = prefix_log_likelihoods(hmm_0, y)
    return np.array([_combine(a, b) for a, b in zip(theta_prefix, nominal_prefix)])


def sequential_test(y: ObsSequence, hmm_theta: Hmm, hmm_0: Hmm,
                    params: DetectionParams) -> SprtOutcome:
    """
    Run the SPRT stopping rule over the prefixes of y

    Stops at the first prefix whose log ratio leaves (epsilon, beta_threshold);
    returns CONTINUE with the final ratio if no prefix does.
    """
    ratios = prefix_log_likelihood_ratios(y, hmm_theta, hmm_0)
    for index, llr in enumerate(ratios, start=1):
        decision = sprt_decision(float(llr), params)
        if decision is not SprtDecision.CONTINUE:
            return SprtOutcome(decision=decision, stopping_index=index, llr=float(llr))
    final = float(ratios[-1]) if ratios.size else 0.0
    return SprtOutcome(decision=SprtDecision.CONTINUE, stopping_index=None, llr=final)


def detection_indicators(
    samples: Iterable[ObsSequence],
    hmm_theta: Hmm,
    hmm_0: Hmm,
    epsilon: float,
    nominal_log_likelihoods: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    1{y_i detected} for every sample, sharing work between repeated sequences

    `nominal_log_likelihoods` may carry precomputed ln P(y_i; M0) values.
    """
    samples = list(samples)
    theta_cache: dict[bytes, float] = {}
    nominal_cache: dict[bytes, float] = {}
    flags = np.zeros(len(samples), dtype=bool)
    for i, y in enumerate(samples):
        key = y.key
        if key not in theta_cache:
            theta_cache[key] = log_likelihood(hmm_theta, y)
        if nominal_log_likelihoods is not None:
            log_nominal = float(nominal_log_likelihoods[i])
        elif hmm_theta is hmm_0:
            log_nominal = theta_cache[key]
        else:
            if key not in nominal_cache:
                nominal_cache[key] = log_likelihood(hmm_0, y)
            log_nominal = nominal_cache[key]
        flags[i] = _combine(theta_cache[key], log_nominal) > epsilon
    return flags


def estimate_detection_probability(
    samples: list[ObsSequence],
    hmm_theta: Hmm,
    hmm_0: Hmm,
    epsilon: float,
) -> tuple[float, float]:
    """
    Fraction of detected samples and its binomial standard error

    Returns:
        (p_hat, sqrt(p_hat * (1 - p_hat) / N))

    Raises:
        ValueError: empty sample list
    """
    if not samples:
        raise ValueError("cannot estimate a detection probability from zero samples")
    flags = detection_indicators(samples, hmm_theta, hmm_0, epsilon)
    estimate = float(flags.mean())
    return estimate, math.sqrt(estimate * (1.0 - estimate) / len(samples))
