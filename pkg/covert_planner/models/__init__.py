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
Data models shared across services and pipelines
"""

from covert_planner.models.mdp import Mdp, PolicyParams, Run, ValidationReport
from covert_planner.models.hmm import Hmm, NULL_SYMBOL, ObsModel, ObsSequence, nature_index
from covert_planner.models.grid import Cell, GridSpec, Sensor
from covert_planner.models.progress import ProgressEvent
from covert_planner.models.training import (
    TRACE_HEADER,
    BatchSample,
    CheckResult,
    EvaluationSummary,
    TraceRow,
    TrainerTrace,
    TrainingResult,
)

__all__ = [
    "Mdp",
    "PolicyParams",
    "Run",
    "ValidationReport",
    "Hmm",
    "NULL_SYMBOL",
    "ObsModel",
    "ObsSequence",
    "nature_index",
    "Cell",
    "GridSpec",
    "Sensor",
    "ProgressEvent",
    "TRACE_HEADER",
    "BatchSample",
    "CheckResult",
    "EvaluationSummary",
    "TraceRow",
    "TrainerTrace",
    "TrainingResult",
]
