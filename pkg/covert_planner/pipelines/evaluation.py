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
Evaluation pipelines

EvaluationPipeline scores one policy file in one environment;
CrossEvaluationPipeline scores several policy files under several slip values
and writes the detection table.
"""

from pathlib import Path
from typing import Callable, Optional, Sequence

from loguru import logger

from covert_planner.config.schema import ExperimentConfig
from covert_planner.errors import ConfigError
from covert_planner.models.progress import ProgressEvent
from covert_planner.models.training import EvaluationSummary
from covert_planner.pipelines.base import BasePipeline
from covert_planner.services.environment import build_environment
from covert_planner.services.evaluation import evaluate_policy
from covert_planner.services.persistence import PersistenceService


def resolve_samples(config: ExperimentConfig, n_samples: Optional[int]) -> int:
    """
    Explicit sample count, or the config default when none is given

    Raises:
        ConfigError: explicit count below 1
    """
    if n_samples is None:
        return config.evaluation.samples
    if n_samples < 1:
        raise ConfigError(f"samples must be >= 1, got {n_samples}")
    return n_samples


class EvaluationPipeline(BasePipeline):
    """Monte Carlo value / detection summary of a saved policy"""

    def __call__(
        self,
        progress_callback: Optional[Callable[[ProgressEvent], None]] = None,
        *,
        config: ExperimentConfig,
        policy_path: str | Path,
        n_samples: Optional[int] = None,
        seed: Optional[int] = None,
        slip_beta: Optional[float] = None,
        output_dir: Optional[str | Path] = None,
    ) -> EvaluationSummary:
        n_samples = resolve_samples(config, n_samples)
        env = build_environment(config, slip_beta=slip_beta)
        policy = PersistenceService.load_policy(policy_path, env.mdp)
        self._report_progress(progress_callback, "evaluation", 0.0)
        summary = evaluate_policy(
            env.mdp,
            env.obs,
            policy,
            env.nominal_policy,
            config.detection.epsilon,
            n_samples,
            config.hyper.horizon,
            seed=config.seed if seed is None else seed,
            label=str(policy_path),
        )
        if output_dir is not None:
            PersistenceService(output_dir).save_summary(summary.as_dict())
        self._report_progress(progress_callback, "evaluation", 1.0)
        logger.info(
            f"✅ {policy_path}: value {summary.value_mean:.3f} ± {summary.value_se:.3f}, "
            f"detection {summary.detection_mean:.3f} ± {summary.detection_se:.3f}"
        )
        return summary


def cross_eval_header(slips: Sequence[float]) -> list[str]:
    header = ["policy"]
    for slip in slips:
        header += [f"detection_{slip}", f"se_{slip}"]
    return header


class CrossEvaluationPipeline(BasePipeline):
    """
    Detection of every policy under every environment slip

    Each policy file is evaluated in the gridworld rebuilt with slip beta';
    the nominal policy is recomputed for that dynamics.
    """

    def __call__(
        self,
        progress_callback: Optional[Callable[[ProgressEvent], None]] = None,
        *,
        config: ExperimentConfig,
        policy_paths: Sequence[str | Path],
        slips: Optional[Sequence[float]] = None,
        n_samples: Optional[int] = None,
        seed: Optional[int] = None,
        output_dir: Optional[str | Path] = None,
    ) -> list[list]:
        slips = list(slips or config.evaluation.slips)
        n_samples = resolve_samples(config, n_samples)
        seed = config.seed if seed is None else seed
        environments = {slip: build_environment(config, slip_beta=slip) for slip in slips}

        rows = []
        total = len(policy_paths) * len(slips)
        for i, path in enumerate(policy_paths):
            row: list = [str(path)]
            for j, slip in enumerate(slips):
                env = environments[slip]
                summary = evaluate_policy(
                    env.mdp,
                    env.obs,
                    PersistenceService.load_policy(path, env.mdp),
                    env.nominal_policy,
                    config.detection.epsilon,
                    n_samples,
                    config.hyper.horizon,
                    seed=seed,
                    label=f"{path}@{slip}",
                )
                row += [repr(summary.detection_mean), repr(summary.detection_se)]
                done = i * len(slips) + j + 1
                self._report_progress(progress_callback, "cross_eval", done / total,
                                      iteration=done, total=total)
                logger.info(
                    f"{path} at slip {slip}: detection "
                    f"{summary.detection_mean:.3f} ± {summary.detection_se:.3f}"
                )
            rows.append(row)

        target = PersistenceService(output_dir or config.output_dir).save_table(
            "cross_eval.csv", cross_eval_header(slips), rows
        )
        logger.success(f"✅ Cross-evaluation table written to {target}")
        return rows
