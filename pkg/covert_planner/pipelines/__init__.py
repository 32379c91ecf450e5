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
Covert-Planner Pipelines

Each pipeline is one end-to-end workflow behind a CLI subcommand.
"""

from covert_planner.pipelines.base import BasePipeline
from covert_planner.pipelines.covert_pg import CovertPgPipeline, TrainingContext
from covert_planner.pipelines.evaluation import CrossEvaluationPipeline, EvaluationPipeline
from covert_planner.pipelines.verification import VerificationPipeline

__all__ = [
    "BasePipeline",
    "CovertPgPipeline",
    "TrainingContext",
    "CrossEvaluationPipeline",
    "EvaluationPipeline",
    "VerificationPipeline",
]
