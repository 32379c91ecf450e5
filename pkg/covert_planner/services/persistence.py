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
Persistence Service

Writes run artifacts (trace, policy, summaries, metadata) to an output
directory and loads policies back.

File structure:
    {output_dir}/
    ├── metadata.json       # config snapshot, seed, status, timestamps
    ├── trace.csv           # one row per outer iteration
    ├── policy.json         # theta table with shape and state/action names
    ├── summary.json        # evaluation / baseline summary
    └── cross_eval.csv      # policy x slip detection table
"""

import csv
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from loguru import logger

from covert_planner.config.loader import to_plain
from covert_planner.errors import ModelValidationError
from covert_planner.models.mdp import Mdp, PolicyParams
from covert_planner.models.training import TRACE_HEADER, TrainerTrace
from covert_planner.utils.os_util import ensure_dir


class PersistenceService:
    """
    Run artifact persistence using the filesystem (CSV / JSON)

    Usage:
        persistence = PersistenceService("output/mini")
        persistence.save_trace(result.trace)
        persistence.save_policy(result.policy, mdp)
        theta = persistence.load_policy("output/mini/policy.json", mdp)
    """

    def __init__(self, output_dir: str | Path = "output"):
        self.output_dir = ensure_dir(output_dir)

    def path(self, name: str) -> Path:
        return self.output_dir / name

    # ========================================================================
    # Tables
    # ========================================================================

    def save_table(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """Write a comma-separated table with a header row"""
        target = self.path(name)
        with open(target, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        logger.debug(f"Saved table: {target}")
        return target

    def save_trace(self, trace: TrainerTrace, name: str = "trace.csv") -> Path:
        """Trace CSV; floats are written with repr so replays are byte-identical"""
        return self.save_table(name, TRACE_HEADER, (row.as_csv_row() for row in trace.rows))

    # ========================================================================
    # Policies
    # ========================================================================

    def save_policy(self, policy: PolicyParams, mdp: Mdp, name: str = "policy.json") -> Path:
        target = self.path(name)
        document = {
            "shape": list(policy.shape),
            "states": list(mdp.state_names),
            "actions": list(mdp.action_names),
            "theta": policy.theta.tolist(),
        }
        with open(target, "w", encoding="utf-8") as f:
            json.dump(document, f, indent=2)
        logger.info(f"Policy saved to {target}")
        return target

    @staticmethod
    def load_policy(path: str | Path, mdp: Optional[Mdp] = None) -> PolicyParams:
        """
        Load a theta table, checking it against `mdp` when given

        Raises:
            ModelValidationError: unreadable file or shape/name mismatch
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
            theta = np.asarray(document["theta"], dtype=float)
        except (OSError, ValueError, KeyError) as e:
            raise ModelValidationError(f"cannot read policy file {path}: {e}") from e
        if list(theta.shape) != list(document.get("shape", theta.shape)):
            raise ModelValidationError(f"policy file {path}: theta does not match its declared shape")
        if mdp is not None:
            if theta.shape != (mdp.n_states, mdp.n_actions):
                raise ModelValidationError(
                    f"policy shape {theta.shape} does not match the environment "
                    f"({mdp.n_states}, {mdp.n_actions})"
                )
            states = document.get("states")
            if states is not None and tuple(states) != mdp.state_names:
                raise ModelValidationError(f"policy file {path} was trained on different states")
        return PolicyParams(theta)

    # ========================================================================
    # Summaries & metadata
    # ========================================================================

    def save_summary(self, summary: dict, name: str = "summary.json") -> Path:
        target = self.path(name)
        with open(target, "w", encoding="utf-8") as f:
            json.dump(to_plain(summary), f, indent=2, ensure_ascii=False)
        logger.debug(f"Saved summary: {target}")
        return target

    def save_metadata(self, metadata: dict) -> Path:
        """
        Save run metadata

        Args:
            metadata: {"status", "seed", "config", "created_at", "completed_at", ...};
                datetimes are stored as ISO strings
        """
        metadata = dict(metadata)
        for key in ("created_at", "completed_at"):
            if isinstance(metadata.get(key), datetime):
                metadata[key] = metadata[key].isoformat()
        target = self.path("metadata.json")
        with open(target, "w", encoding="utf-8") as f:
            json.dump(to_plain(metadata), f, indent=2, ensure_ascii=False)
        logger.debug(f"Saved metadata: {target}")
        return target

    def load_metadata(self) -> Optional[dict]:
        target = self.path("metadata.json")
        if not target.exists():
            return None
        with open(target, "r", encoding="utf-8") as f:
            return json.load(f)
