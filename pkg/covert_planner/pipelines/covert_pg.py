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
Covert policy-gradient training pipeline

Template-method workflow:
1. setup_environment   - build MDP / observer / nominal policy, open the output dir
2. compute_baselines   - evaluate the deterministic and softmax optimal policies
3. optimize            - primal-dual training
4. finalize            - write trace, policy, summary and metadata
"""

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional

from loguru import logger

from covert_planner.config.schema import ExperimentConfig
from covert_planner.models.progress import ProgressEvent
from covert_planner.models.training import EvaluationSummary, TrainingResult
from covert_planner.pipelines.base import BasePipeline
from covert_planner.services.environment import Environment, build_environment
from covert_planner.services.evaluation import baseline_summary
from covert_planner.services.persistence import PersistenceService
from covert_planner.services.trainer import run_covert_pg


@dataclass
class TrainingContext:
    """State of one training run, passed between the lifecycle steps"""
    config: ExperimentConfig
    output_dir: Path
    seed: int
    progress_callback: Optional[Callable[[ProgressEvent], None]] = None
    skip_baselines: bool = False

    started_at: datetime = field(default_factory=datetime.now)
    environment: Optional[Environment] = None
    persistence: Optional[PersistenceService] = None
    baselines: dict[str, EvaluationSummary] = field(default_factory=dict)
    result: Optional[TrainingResult] = None


class CovertPgPipeline(BasePipeline):
    """
    Train a covert policy for one experiment config

    Example:
        >>> result = core.pipelines["train"](config=config, output_dir="output/mini")
        >>> result.trace.last.detection
    """

    def __call__(
        self,
        progress_callback: Optional[Callable[[ProgressEvent], None]] = None,
        *,
        config: ExperimentConfig,
        output_dir: Optional[str | Path] = None,
        seed: Optional[int] = None,
        skip_baselines: bool = False,
    ) -> TrainingResult:
        ctx = TrainingContext(
            config=config,
            output_dir=Path(output_dir or config.output_dir),
            seed=config.seed if seed is None else seed,
            progress_callback=progress_callback,
            skip_baselines=skip_baselines,
        )
        try:
            self.setup_environment(ctx)
            self.compute_baselines(ctx)
            self.optimize(ctx)
            return self.finalize(ctx)
        except Exception as e:
            self.handle_exception(ctx, e)
            raise

    # ==================== Lifecycle Methods ====================

    def setup_environment(self, ctx: TrainingContext):
        """Step 1: build the environment and open the output directory"""
        logger.info(f"🚀 Training '{ctx.config.name}' (seed {ctx.seed}) -> {ctx.output_dir}")
        ctx.persistence = PersistenceService(ctx.output_dir)
        ctx.persistence.save_metadata({
            "name": ctx.config.name,
            "status": "running",
            "seed": ctx.seed,
            "created_at": ctx.started_at,
            "config": ctx.config.to_dict(),
        })
        ctx.environment = build_environment(ctx.config)
        self._report_progress(ctx.progress_callback, "environment", 0.0)

    def compute_baselines(self, ctx: TrainingContext):
        """Step 2: value / detection of the observer-blind optimal policies"""
        if ctx.skip_baselines:
            return
        env = ctx.environment
        ctx.baselines = baseline_summary(
            env.mdp,
            env.obs,
            env.nominal_policy,
            env.initial_theta,
            ctx.config.detection.epsilon,
            ctx.config.evaluation.samples,
            ctx.config.hyper.horizon,
            seed=ctx.seed,
        )
        self._report_progress(ctx.progress_callback, "baselines", 0.0)

    def optimize(self, ctx: TrainingContext):
        """Step 3: primal-dual proximal policy gradient"""
        env = ctx.environment
        ctx.result = run_covert_pg(
            env.mdp,
            env.obs,
            env.nominal_policy,
            ctx.config.detection,
            ctx.config.hyper,
            seed=ctx.seed,
            initial_theta=env.initial_theta,
            progress_callback=ctx.progress_callback,
        )

    def finalize(self, ctx: TrainingContext) -> TrainingResult:
        """Step 4: persist artifacts"""
        result = ctx.result
        last = result.trace.last
        ctx.persistence.save_trace(result.trace)
        ctx.persistence.save_policy(result.policy, ctx.environment.mdp)
        summary = {
            "name": ctx.config.name,
            "iterations": result.iterations,
            "converged": result.converged,
            "value": last.value,
            "detection": last.detection,
            "kl": last.kl,
            "lambda": result.lam,
            "beta": result.beta,
            "baselines": {name: s.as_dict() for name, s in ctx.baselines.items()},
        }
        ctx.persistence.save_summary(summary)
        ctx.persistence.save_metadata({
            "name": ctx.config.name,
            "status": "completed",
            "seed": ctx.seed,
            "created_at": ctx.started_at,
            "completed_at": datetime.now(),
            "config": ctx.config.to_dict(),
        })
        self._report_progress(ctx.progress_callback, "completed", 1.0)
        logger.success(
            f"✅ Training finished: value={last.value:.4f} detection={last.detection:.3f} "
            f"lambda={result.lam:.4f}"
        )
        return result

    def handle_exception(self, ctx: TrainingContext, error: Exception):
        """Record the failure in metadata.json when the output dir exists"""
        logger.error(f"Training failed: {error}")
        if ctx.persistence is None:
            return
        ctx.persistence.save_metadata({
            "name": ctx.config.name,
            "status": "failed",
            "seed": ctx.seed,
            "created_at": ctx.started_at,
            "completed_at": datetime.now(),
            "error": str(error),
            "config": ctx.config.to_dict(),
        })
