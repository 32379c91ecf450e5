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
Exception hierarchy

Every error raised on purpose by covert-planner derives from CovertPlannerError,
so callers (and the CLI) can map failures to exit codes without string matching.
"""


class CovertPlannerError(Exception):
    """Base class for all covert-planner errors"""

    exit_code: int = 2


class ConfigError(CovertPlannerError):
    """Invalid or unreadable configuration, preset or CLI argument"""

    exit_code = 1


class ModelValidationError(CovertPlannerError):
    """MDP, observation model or HMM tables violate their invariants"""

    exit_code = 1

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []


class EnumerationLimitError(CovertPlannerError):
    """Exact enumeration would exceed the configured blow-up guard"""


class ConvergenceError(CovertPlannerError):
    """An iterative solver did not converge within its sweep cap"""


class DetectionSupportError(CovertPlannerError):
    """Observation sequence has zero probability under both hypotheses"""


class TrainerAbort(CovertPlannerError):
    """Primal-dual training produced a non-finite quantity"""
