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
Verification pipeline

Property suites run against the exact oracles:
- oracle:    enumeration, likelihood and detection-probability sanity checks
- gradients: the three policy-gradient estimators versus finite differences
             (toy at horizon 3, value and KL also on the chain at horizon 4)
- theorem1:  covert Markov versus finite-memory value on the coin MDP
- all:       every suite above
"""

from typing import Callable, Optional

import numpy as np
from loguru import logger

from covert_planner.errors import ConfigError
from covert_planner.models.hmm import ObsModel
from covert_planner.models.mdp import Mdp, PolicyParams
from covert_planner.models.progress import ProgressEvent
from covert_planner.models.training import CheckResult
from covert_planner.pipelines.base import BasePipeline
from covert_planner.services.detection import log_likelihood_ratio
from covert_planner.services.estimators import (
    constraint_gradient,
    kl_gradient,
    score_function,
    value_gradient,
)
from covert_planner.services.hmm import build_hmm, log_likelihood
from covert_planner.services.oracle import (
    batch_from_ensemble,
    coin_mdp_check,
    enumerate_joint,
    enumerate_observations,
    enumerate_runs,
    exact_detection_probability,
    exact_kl,
    exact_value,
    finite_difference_gradient,
    path_sum_likelihood,
)

SUITES = ("oracle", "gradients", "theorem1")
TOY_HORIZON = 3
CHAIN_HORIZON = 4
GRADIENT_TOLERANCE = 1e-3
COIN_RHOS = (0.04, 0.25, 0.49)


def toy_problem() -> tuple[Mdp, ObsModel]:
    """Two-state, two-action MDP with a noisy two-symbol observer"""
    transition = np.array([
        [[0.8, 0.2], [0.3, 0.7]],
        [[0.5, 0.5], [0.1, 0.9]],
    ])
    reward = np.array([[1.0, 0.0], [0.0, 2.0]])
    mdp = Mdp(transition=transition, reward=reward, initial_state=0, discount=0.9)
    obs = ObsModel.with_null_actions(("lo", "hi"), np.array([[0.9, 0.1], [0.2, 0.8]]), 2)
    return mdp, obs


def toy_policies() -> tuple[PolicyParams, PolicyParams]:
    """(policy under test, nominal policy)"""
    theta = PolicyParams(np.random.default_rng(11).normal(scale=0.5, size=(2, 2)))
    return theta, PolicyParams.zeros(2, 2)


def chain_problem() -> tuple[Mdp, ObsModel]:
    """Three-state chain; state 2 is an absorbing goal rewarded on entry"""
    transition = np.array([
        [[0.9, 0.1, 0.0], [0.2, 0.8, 0.0]],
        [[0.7, 0.3, 0.0], [0.0, 0.2, 0.8]],
        [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
    ])
    reward = np.array([[0.0, 0.0], [0.0, 0.8], [0.0, 0.0]])
    mdp = Mdp(transition=transition, reward=reward, initial_state=0, discount=0.9,
              absorbing=frozenset({2}))
    obs = ObsModel.with_null_actions(
        ("quiet", "loud"), np.array([[0.9, 0.1], [0.5, 0.5], [0.1, 0.9]]), 2
    )
    return mdp, obs


def chain_policies() -> tuple[PolicyParams, PolicyParams]:
    """(policy under test, nominal policy) on the chain"""
    return PolicyParams(np.array([[0.3, -0.6], [0.8, 0.1], [0.0, 0.0]])), PolicyParams.zeros(3, 2)


def _relative_error(estimate: np.ndarray, reference: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(reference))), 1e-8)
    return float(np.max(np.abs(estimate - reference))) / scale


def _check(suite: str, name: str, deviation: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(suite=suite, name=name, passed=bool(deviation <= tolerance),
                       deviation=deviation, tolerance=tolerance, detail=detail)


def run_oracle_suite() -> list[CheckResult]:
    mdp, obs = toy_problem()
    theta, nominal = toy_policies()
    checks = []

    runs = enumerate_runs(mdp, theta, TOY_HORIZON)
    checks.append(_check("oracle", "run_probabilities_sum_to_one",
                         abs(runs.total_probability - 1.0), 1e-9))

    joint = enumerate_joint(mdp, theta, obs, TOY_HORIZON)
    total = sum(p for _, _, p in joint.joint)
    checks.append(_check("oracle", "joint_probabilities_sum_to_one", abs(total - 1.0), 1e-9))

    expected_score = sum(p * score_function(run, theta) for run, p in runs.entries)
    checks.append(_check("oracle", "score_expectation_vanishes",
                         float(np.max(np.abs(expected_score))), 1e-12))

    hmm = build_hmm(mdp, theta, obs)
    worst = 0.0
    for y in enumerate_observations(obs.n_symbols, 5):
        worst = max(worst, abs(np.exp(log_likelihood(hmm, y)) - path_sum_likelihood(hmm, y)))
    checks.append(_check("oracle", "forward_matches_path_sum", worst, 1e-12))

    thresholds = (-1.0, 0.0, 0.5, 1.0, 3.0)
    probabilities = [
        exact_detection_probability(mdp, theta, obs, nominal, eps, TOY_HORIZON) for eps in thresholds
    ]
    increase = max(0.0, max(b - a for a, b in zip(probabilities, probabilities[1:])))
    checks.append(_check("oracle", "detection_monotone_in_epsilon", increase, 0.0,
                         detail=" ".join(f"{p:.4f}" for p in probabilities)))

    self_detection = max(
        exact_detection_probability(mdp, nominal, obs, nominal, 3.0, TOY_HORIZON),
        1.0 - exact_detection_probability(mdp, nominal, obs, nominal, -1.0, TOY_HORIZON),
    )
    checks.append(_check("oracle", "nominal_detection_extremes", self_detection, 1e-12))
    return checks


def separating_epsilon(batch, hmm_theta, hmm_0) -> float:
    """Midpoint of the widest gap between attainable log-likelihood ratios"""
    ratios = np.unique([log_likelihood_ratio(y, hmm_theta, hmm_0) for y in batch.observations])
    ratios = ratios[np.isfinite(ratios)]
    if ratios.size < 2:
        return 0.0
    i = int(np.argmax(np.diff(ratios)))
    return float((ratios[i] + ratios[i + 1]) / 2.0)


def _value_and_kl_checks(prefix: str, mdp: Mdp, theta: PolicyParams, anchor: PolicyParams,
                         horizon: int) -> list[CheckResult]:
    batch = batch_from_ensemble(enumerate_runs(mdp, theta, horizon), theta, mdp)
    estimate = value_gradient(batch, theta, theta)
    reference = finite_difference_gradient(lambda th: exact_value(mdp, th, horizon), theta)
    checks = [_check("gradients", f"{prefix}value_gradient", _relative_error(estimate, reference),
                     GRADIENT_TOLERANCE, detail=f"horizon={horizon}")]

    batch = batch_from_ensemble(enumerate_runs(mdp, anchor, horizon), anchor, mdp)
    estimate = kl_gradient(batch, theta, anchor)
    reference = finite_difference_gradient(lambda th: exact_kl(mdp, anchor, th, horizon), theta)
    checks.append(_check("gradients", f"{prefix}kl_gradient", _relative_error(estimate, reference),
                         GRADIENT_TOLERANCE, detail=f"horizon={horizon}"))
    return checks


def run_gradient_suite() -> list[CheckResult]:
    mdp, obs = toy_problem()
    theta, nominal = toy_policies()
    checks = _value_and_kl_checks("", mdp, theta, nominal, TOY_HORIZON)

    batch = batch_from_ensemble(enumerate_joint(mdp, theta, obs, TOY_HORIZON), theta, mdp)
    hmm_theta, hmm_0 = build_hmm(mdp, theta, obs), build_hmm(mdp, nominal, obs)
    epsilon = separating_epsilon(batch, hmm_theta, hmm_0)
    estimate = constraint_gradient(batch, theta, theta, hmm_theta, hmm_0, epsilon)
    reference = -finite_difference_gradient(
        lambda th: exact_detection_probability(mdp, th, obs, nominal, epsilon, TOY_HORIZON), theta
    )
    checks.append(_check("gradients", "constraint_gradient", _relative_error(estimate, reference),
                         GRADIENT_TOLERANCE, detail=f"epsilon={epsilon:.4f}"))

    chain, _ = chain_problem()
    chain_theta, chain_nominal = chain_policies()
    checks.extend(_value_and_kl_checks("chain_", chain, chain_theta, chain_nominal, CHAIN_HORIZON))
    return checks


def run_coin_suite() -> list[CheckResult]:
    checks = []
    for rho in COIN_RHOS:
        result = coin_mdp_check(rho)
        alpha, beta = result.grid_maximizer
        consistent = (
            abs(result.grid_value - result.best_markov_value) <= 1e-12
            and abs(alpha - np.sqrt(rho)) <= 1e-3
            and beta == 1.0
            and abs(result.enumerated_value - result.best_markov_value) <= 1e-12
        )
        # deviation > 0 means the gap falls short of the bound
        deviation = result.bound - result.gap
        checks.append(CheckResult(
            suite="theorem1",
            name=f"coin_rho_{rho}",
            passed=bool(deviation <= 1e-12 and consistent),
            deviation=deviation,
            tolerance=1e-12,
            detail=(f"markov={result.best_markov_value:.6f} finite_memory={result.finite_memory_value:.6f} "
                    f"gap={result.gap:.6f} bound={result.bound:.6f}"),
        ))
    return checks


_RUNNERS: dict[str, Callable[[], list[CheckResult]]] = {
    "oracle": run_oracle_suite,
    "gradients": run_gradient_suite,
    "theorem1": run_coin_suite,
}


class VerificationPipeline(BasePipeline):
    """Run one property suite (or all of them) and return the per-check results"""

    def __call__(
        self,
        progress_callback: Optional[Callable[[ProgressEvent], None]] = None,
        *,
        suite: str = "all",
    ) -> list[CheckResult]:
        if suite != "all" and suite not in _RUNNERS:
            raise ConfigError(f"unknown suite '{suite}'. Available: {', '.join(SUITES + ('all',))}")
        names = list(SUITES) if suite == "all" else [suite]
        results = []
        for i, name in enumerate(names, start=1):
            logger.info(f"🚀 Running verification suite '{name}'")
            results.extend(_RUNNERS[name]())
            self._report_progress(progress_callback, "suite", i / len(names),
                                  iteration=i, total=len(names), extra_info=name)
        failed = [r for r in results if not r.passed]
        if failed:
            logger.warning(f"⚠️ {len(failed)} of {len(results)} checks failed")
        else:
            logger.success(f"✅ All {len(results)} checks passed")
        return results
