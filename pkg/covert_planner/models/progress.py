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
Progress event models for training and verification runs

Provides structured progress events for the CLI (or any other front end) to
consume and render.
"""

from dataclasses import dataclass
from typing import Optional


@dataclass
class ProgressEvent:
    """
    Structured progress event

    Attributes:
        event_type: Type of event (e.g., "baselines", "outer_iteration", "check")
        progress: Progress value from 0.0 to 1.0
        iteration: Current outer iteration / check number (1-based, optional)
        total: Total number of iterations / checks (optional)
        extra_info: Additional information (e.g., "detection=0.31 lambda=10.2")

    Examples:
        ProgressEvent(event_type="baselines", progress=0.0)

        ProgressEvent(
            event_type="outer_iteration",
            progress=0.25,
            iteration=100,
            total=400,
            extra_info="detection=0.210",
        )
    """
    event_type: str
    progress: float

    iteration: Optional[int] = None
    total: Optional[int] = None
    extra_info: Optional[str] = None

    def __post_init__(self):
        """Validate progress value"""
        if not 0.0 <= self.progress <= 1.0:
            raise ValueError(f"Progress must be between 0.0 and 1.0, got {self.progress}")
