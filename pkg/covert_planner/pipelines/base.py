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
Base Pipeline

All pipelines inherit from BasePipeline.
"""

from abc import ABC, abstractmethod
from typing import Any, Callable, Optional

from loguru import logger

from covert_planner.models.progress import ProgressEvent


class BasePipeline(ABC):
    """
    Base pipeline

    Design principles:
    - Each pipeline is one complete CLI workflow (train, evaluate, verify, ...)
    - Pipelines have access to the core (config manager, persistence) via self.core
    - Pipelines report progress via progress_callback
    """

    def __init__(self, core):
        """
        Args:
            core: CovertPlannerCore instance
        """
        self.core = core

    @abstractmethod
    def __call__(
        self,
        progress_callback: Optional[Callable[[ProgressEvent], None]] = None,
        **kwargs,
    ) -> Any:
        """
        Execute the pipeline

        Args:
            progress_callback: Optional callback for progress updates (receives ProgressEvent)
            **kwargs: Pipeline-specific parameters
        """

    def _report_progress(
        self,
        callback: Optional[Callable[[ProgressEvent], None]],
        event_type: str,
        progress: float,
        **kwargs,
    ):
        """
        Report progress via callback

        Args:
            callback: Progress callback function
            event_type: Type of progress event
            progress: Progress value (0.0-1.0)
            **kwargs: iteration, total, extra_info
        """
        if callback:
            callback(ProgressEvent(event_type=event_type, progress=progress, **kwargs))
        logger.debug(f"Progress: {progress*100:.0f}% - {event_type}")
