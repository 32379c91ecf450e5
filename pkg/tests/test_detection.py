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

import math

import numpy as np
import pytest

from covert_planner.config import DetectionParams
from covert_planner.errors import DetectionSupportError
from covert_planner.models import Hmm, ObsSequence
from covert_planner.services.detection import (
    SprtDecision,
    detection_indicators,
    estimate_detection_probability,
    is_detected,
    log_likelihood_ratio,
    prefix_log_likelihood_ratios,
    sequential_test,
    sprt_decision,
)


def single_state_hmm(emission):
    return Hmm(transition=[[1.0]], emission=[emission], initial=[1.0])


@pytest.fixture
def biased():
    return single_state_hmm([0.9, 0.1])


@pytest.fixture
def fair():
    return single_state_hmm([0.5, 0.5])


def test_identical_models_give_zero_ratio(biased):
    y = ObsSequence([0, 1, 1, 0])
    assert log_likelihood_ratio(y, biased, biased) == 0.0
    assert not is_detected(y, biased, biased, 0.0)


def test_ratio_of_bernoulli_sequences(biased, fair):
    y = ObsSequence([0, 0, 1])
    expected = 2 * math.log(1.8) + math.log(0.2)
    assert log_likelihood_ratio(y, biased, fair) == pytest.approx(expected, abs=1e-12)


def test_support_conventions():
    only_zero = single_state_hmm([1.0, 0.0, 0.0])
    only_one = single_state_hmm([0.0, 1.0, 0.0])
    assert log_likelihood_ratio(ObsSequence([0]), only_zero, only_one) == math.inf
    assert log_likelihood_ratio(ObsSequence([1]), only_zero, only_one) == -math.inf
    with pytest.raises(DetectionSupportError):
        log_likelihood_ratio(ObsSequence([2]), only_zero, only_one)


def test_support_leakage_is_always_detected():
    only_zero = single_state_hmm([1.0, 0.0])
    fair = single_state_hmm([0.5, 0.5])
    assert is_detected(ObsSequence([0]), fair, only_zero, 1e9) is False
    assert is_detected(ObsSequence([1]), fair, only_zero, 1e9) is True


def test_detection_threshold_is_strict():
    params = DetectionParams(epsilon=3.0)
    assert sprt_decision(3.0, params) is SprtDecision.ACCEPT_NULL
    assert sprt_decision(3.0 + 1e-9, params) is SprtDecision.CONTINUE
    bounded = DetectionParams(epsilon=-1.0, beta_threshold=2.0)
    assert sprt_decision(2.0, bounded) is SprtDecision.ACCEPT_ALTERNATIVE
    assert sprt_decision(0.5, bounded) is SprtDecision.CONTINUE


def test_sequential_test_stops_at_first_crossing(biased, fair):
    params = DetectionParams(epsilon=-1.0, beta_threshold=2.0)
    outcome = sequential_test(ObsSequence([0] * 6), biased, fair, params)
    assert outcome.decision is SprtDecision.ACCEPT_ALTERNATIVE
    assert outcome.stopping_index == 4
    assert outcome.llr == pytest.approx(4 * math.log(1.8))

    outcome = sequential_test(ObsSequence([1, 0, 0]), biased, fair, params)
    assert outcome.decision is SprtDecision.ACCEPT_NULL
    assert outcome.stopping_index == 1


def test_sequential_test_without_crossing_continues(biased, fair):
    params = DetectionParams(epsilon=-5.0, beta_threshold=5.0)
    outcome = sequential_test(ObsSequence([0, 1]), biased, fair, params)
    assert outcome.decision is SprtDecision.CONTINUE
    assert outcome.stopping_index is None
    assert outcome.llr == pytest.approx(math.log(1.8) + math.log(0.2))


def test_prefix_ratios(biased, fair):
    ratios = prefix_log_likelihood_ratios(ObsSequence([0, 0, 1]), biased, fair)
    np.testing.assert_allclose(ratios, np.cumsum(np.log([1.8, 1.8, 0.2])), atol=1e-12)


def test_detection_estimate_and_standard_error(biased, fair):
    samples = [ObsSequence([0]), ObsSequence([1]), ObsSequence([0]), ObsSequence([1])]
    p_hat, se = estimate_detection_probability(samples, biased, fair, 0.0)
    assert p_hat == 0.5
    assert se == pytest.approx(math.sqrt(0.25 / 4))


def test_identical_models_never_detect(biased):
    samples = [ObsSequence([0, 1]), ObsSequence([1, 1])]
    assert estimate_detection_probability(samples, biased, biased, 3.0) == (0.0, 0.0)


def test_empty_sample_is_rejected(biased, fair):
    with pytest.raises(ValueError):
        estimate_detection_probability([], biased, fair, 3.0)


def test_precomputed_nominal_likelihoods_are_used(biased, fair):
    samples = [ObsSequence([0]), ObsSequence([0])]
    flags = detection_indicators(samples, biased, fair, 0.0,
                                 nominal_log_likelihoods=np.array([0.0, -10.0]))
    assert flags.tolist() == [False, True]


def test_epsilon_must_be_below_upper_threshold():
    with pytest.raises(ValueError):
        DetectionParams(epsilon=3.0, beta_threshold=3.0)
