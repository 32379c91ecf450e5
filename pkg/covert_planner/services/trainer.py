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
Primal-dual proximal policy-gradient trainer

Each outer iteration t anchors theta_t, then takes m primal ascent steps on
the KL-augmented Lagrangian (one per batch of N trajectories sampled under
theta_t), and finally moves lambda and beta using all m*N pairs.
"""

from typing import Callable, Optional

import numpy as np
from loguru import logger

from covert_planner.config.schema import DetectionParams, HyperParams
from covert_planner.errors import TrainerAbort
from covert_planner.models.hmm import Hmm, ObsModel
from covert_planner.models.mdp import Mdp, PolicyParams
from covert_planner.models.progress import ProgressEvent
from covert_planner.models.training import BatchSample, TraceRow, TrainerTrace, TrainingResult
from covert_planner.services.detection import detection_indicators
from covert_planner.services.estimators import (
    constraint_gradient,
    dual_gradient,
    kl_estimate,
    kl_gradient,
    lagrangian_value,
    primal_gradient,
    update_beta,
    update_lambda,
    value_estimate,
    value_gradient,
)
from covert_planner.services.hmm import build_hmm, log_likelihood, sample_observation
from covert_planner.services.policy import (
    Policy,
    discounted_return,
    sample_trajectory,
    soft_value_iteration,
    trajectory_log_prob,
)

ProgressCallback = Callable[[ProgressEvent], None]


def sample_batch(
    mdp: Mdp,
    obs: ObsModel,
    theta_t: Policy,
    n_trajectories: int,
    horizon: int,
    rng: np.random.Generator,
    hmm_0: Optional[Hmm] = None,
) -> BatchSample:
    """
    Draw N (run, observation) pairs under theta_t

    With `hmm_0` the nominal log-likelihoods are filled in as well; M0 never
    changes during training so they are computed once per pair.
    """
    pairs = []
    for _ in range(n_trajectories):
        run = sample_trajectory(mdp, theta_t, horizon, rng)
        pairs.append((run, sample_observation(obs, run, rng)))
    nominal = None
    if hmm_0 is not None:
        cache: dict[bytes, float] = {}
        for _, y in pairs:
            if y.key not in cache:
                cache[y.key] = log_likelihood(hmm_0, y)
        nominal = np.array([cache[y.key] for _, y in pairs])
    return BatchSample(
        pairs=pairs,
        anchor_log_probs=np.array([trajectory_log_prob(run, theta_t) for run, _ in pairs]),
        returns=np.array([discounted_return(run, mdp) for run, _ in pairs]),
        nominal_log_likelihoods=nominal,
    )


def run_covert_pg(
    mdp: Mdp,
    obs: ObsModel,
    nominal_policy: Policy,
    detection_params: DetectionParams,
    hyper: HyperParams,
    seed: int = 0,
    initial_theta: Optional[PolicyParams] = None,
    progress_callback: Optional[ProgressCallback] = None,
) -> TrainingResult:
    """
    Train a covert policy

    Batch b of outer iteration t (1-based) is sampled with
    numpy.random.default_rng(seed + (t - 1) * m + b), so a seed fixes the
    whole trace.

    Args:
        mdp: the agent's MDP (its reward is the one being maximised)
        obs: observer model shared by M_theta and M0
        nominal_policy: policy defining the null hypothesis M0
        detection_params: epsilon and tolerated detection probability alpha
        hyper: learning rates, batch sizes and stopping rule
        seed: base seed for the per-batch random streams
        initial_theta: starting policy, soft-optimal for the agent's reward if omitted
        progress_callback: receives one ProgressEvent per outer iteration

    Returns:
        TrainingResult with the final policy and one trace row per outer iteration

    Raises:
        TrainerAbort: the Lagrangian became NaN or infinite
    """
    hmm_0 = build_hmm(mdp, nominal_policy, obs)
    theta = initial_theta if initial_theta is not None else soft_value_iteration(mdp)
    lam, beta = hyper.lambda_init, hyper.beta_init
    epsilon, alpha = detection_params.epsilon, detection_params.alpha
    m, clip = hyper.batches_m, hyper.weight_clip

    trace = TrainerTrace()
    previous: Optional[float] = None
    converged = False
    logger.info(
        f"🚀 Covert policy gradient: up to {hyper.max_outer_iterations} iterations, "
        f"{m} batches x {hyper.trajectories_per_batch} trajectories, alpha={alpha}, epsilon={epsilon}"
    )

    for t in range(1, hyper.max_outer_iterations + 1):
        theta_t = theta
        batches = []
        for b in range(m):
            rng = np.random.default_rng(seed + (t - 1) * m + b)
            batch = sample_batch(mdp, obs, theta_t, hyper.trajectories_per_batch,
                                 hyper.horizon, rng, hmm_0)
            hmm_theta = build_hmm(mdp, theta, obs)
            gradient = primal_gradient(
                value_gradient(batch, theta, theta_t, clip),
                constraint_gradient(batch, theta, theta_t, hmm_theta, hmm_0, epsilon, clip),
                kl_gradient(batch, theta, theta_t),
                lam,
                beta,
            )
            theta = theta + hyper.eta * gradient
            batches.append(batch)
            logger.debug(f"iter {t} batch {b + 1}/{m}: |grad|={float(np.abs(gradient).max()):.4g}")

        pooled = BatchSample.merge(batches)
        hmm_theta = build_hmm(mdp, theta, obs)
        value = value_estimate(pooled, theta, theta_t, clip)
        detection = float(detection_indicators(
            pooled.observations, hmm_theta, hmm_0, epsilon,
            nominal_log_likelihoods=pooled.nominal_log_likelihoods,
        ).mean())
        kl = kl_estimate(pooled, theta, theta_t)
        lagrangian = lagrangian_value(value, detection, kl, lam, alpha, beta)
        if not np.isfinite(lagrangian):
            raise TrainerAbort(
                f"non-finite Lagrangian at iteration {t}: value={value}, detection={detection}, "
                f"kl={kl}, lambda={lam}, beta={beta}"
            )

        lam = update_lambda(lam, hyper.kappa, dual_gradient(detection, alpha))
        beta = update_beta(beta, kl, hyper.d)
        trace.append(TraceRow(t, lagrangian, value, detection, max(kl, 0.0), lam, beta))
        logger.info(
            f"iter {t}: L={lagrangian:.4f} value={value:.4f} detection={detection:.3f} "
            f"kl={kl:.2e} lambda={lam:.4f} beta={beta:.4g}"
        )
        if progress_callback:
            progress_callback(ProgressEvent(
                event_type="outer_iteration",
                progress=t / hyper.max_outer_iterations,
                iteration=t,
                total=hyper.max_outer_iterations,
                extra_info=f"detection={detection:.3f} lambda={lam:.4f}",
            ))

        if previous is not None and abs(lagrangian - previous) < hyper.delta0:
            converged = True
            logger.info(f"✅ Converged after {t} iterations (|dL| < {hyper.delta0})")
            break
        previous = lagrangian
    else:
        logger.warning(f"⚠️ Stopped at the iteration cap ({hyper.max_outer_iterations})")

    return TrainingResult(
        policy=theta,
        trace=trace,
        lam=lam,
        beta=beta,
        converged=converged,
        iterations=len(trace),
    )
