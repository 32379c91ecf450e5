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
Training, evaluation and verification result models
"""

from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

import numpy as np

from covert_planner.models.hmm import ObsSequence
from covert_planner.models.mdp import PolicyParams, Run

TRACE_HEADER = ("iter", "lagrangian", "value", "detection", "kl", "lambda", "beta")


@dataclass
class BatchSample:
    """
    Run/observation pairs drawn under the anchor policy theta_t

    Attributes:
        pairs: (run, observation) pairs
        anchor_log_probs: ln P_{theta_t}(x_i), policy factors only
        returns: discounted return of every run
        sample_weights: averaging weights summing to 1 (uniform 1/N for Monte
            Carlo batches, exact probabilities for enumerated ensembles)
        nominal_log_likelihoods: ln P(y_i; M0), filled lazily since M0 is fixed
    """
    pairs: list[tuple[Run, ObsSequence]]
    anchor_log_probs: np.ndarray
    returns: np.ndarray
    sample_weights: Optional[np.ndarray] = None
    nominal_log_likelihoods: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.pairs)
        self.anchor_log_probs = np.asarray(self.anchor_log_probs, dtype=float)
        self.returns = np.asarray(self.returns, dtype=float)
        if self.sample_weights is None:
            self.sample_weights = np.full(n, 1.0 / n) if n else np.zeros(0)
        else:
            self.sample_weights = np.asarray(self.sample_weights, dtype=float)
        if not (self.anchor_log_probs.shape == self.returns.shape == self.sample_weights.shape == (n,)):
            raise ValueError("batch arrays must have one entry per pair")

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def runs(self) -> list[Run]:
        return [run for run, _ in self.pairs]

    @property
    def observations(self) -> list[ObsSequence]:
        return [y for _, y in self.pairs]

    @classmethod
    def merge(cls, batches: list["BatchSample"]) -> "BatchSample":
        """Concatenate Monte Carlo batches into one uniformly weighted sample"""
        pairs = [pair for batch in batches for pair in batch.pairs]
        nominal = None
        if batches and all(b.nominal_log_likelihoods is not None for b in batches):
            nominal = np.concatenate([b.nominal_log_likelihoods for b in batches])
        return cls(
            pairs=pairs,
            anchor_log_probs=np.concatenate([b.anchor_log_probs for b in batches]),
            returns=np.concatenate([b.returns for b in batches]),
            nominal_log_likelihoods=nominal,
        )


@dataclass
class TraceRow:
    """One completed outer iteration (lambda/beta are the post-update values)"""
    iteration: int
    lagrangian: float
    value: float
    detection: float
    kl: float
    lam: float
    beta: float

    def as_csv_row(self) -> list[str]:
        return [str(self.iteration)] + [
            repr(float(v)) for v in (self.lagrangian, self.value, self.detection,
                                     self.kl, self.lam, self.beta)
        ]


@dataclass
class TrainerTrace:
    """Per-iteration history of the primal-dual trainer"""
    rows: list[TraceRow] = field(default_factory=list)

    def append(self, row: TraceRow):
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        attribute = {"iter": "iteration", "lambda": "lam"}.get(name, name)
        return np.array([getattr(row, attribute) for row in self.rows], dtype=float)

    @property
    def last(self) -> Optional[TraceRow]:
        return self.rows[-1] if self.rows else None


@dataclass
class TrainingResult:
    """Outcome of one covert policy-gradient run"""
    policy: PolicyParams
    trace: TrainerTrace
    lam: float
    beta: float
    converged: bool
    iterations: int
    created_at: datetime = field(default_factory=datetime.now)


@dataclass
class EvaluationSummary:
    """Monte Carlo evaluation of a policy in one environment"""
    value_mean: float
    value_se: float
    detection_mean: float
    detection_se: float
    n_samples: int
    label: str = ""

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "value_mean": self.value_mean,
            "value_se": self.value_se,
            "detection_mean": self.detection_mean,
            "detection_se": self.detection_se,
            "n_samples": self.n_samples,
        }


@dataclass
class CheckResult:
    """One verification check (PASS/FAIL with the measured deviation)"""
    suite: str
    name: str
    passed: bool
    deviation: float = 0.0
    tolerance: float = 0.0
    detail: str = ""

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.suite}/{self.name}: deviation={self.deviation:.3e} (tol {self.tolerance:.1e})"
        return f"{text} {self.detail}".rstrip()
