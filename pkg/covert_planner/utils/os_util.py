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
OS utilities for path management

Relative paths in configs and CLI flags are resolved against the project
root, taken from the COVERT_PLANNER_ROOT environment variable when set.
"""

import os
from pathlib import Path


def get_covert_planner_root_path() -> str:
    """
    Get the project root path

    Uses the COVERT_PLANNER_ROOT environment variable, falling back to the
    current working directory.
    """
    env_root = os.environ.get("COVERT_PLANNER_ROOT")
    if env_root and Path(env_root).exists():
        return str(Path(env_root).resolve())
    return str(Path.cwd())


def get_root_path(*paths: str) -> str:
    """
    Get path relative to the project root

    Example:
        get_root_path("output", "mini")
        # Returns: "/path/to/project/output/mini"
    """
    root_path = get_covert_planner_root_path()
    if paths:
        return os.path.join(root_path, *paths)
    return root_path


def resolve_path(path: str | Path) -> Path:
    """Absolute paths pass through; relative ones hang off the project root"""
    path = Path(path)
    if path.is_absolute():
        return path
    return Path(get_root_path(str(path)))


def ensure_dir(path: str | Path) -> Path:
    """
    Ensure directory exists, create if not

    Returns:
        Absolute path of directory
    """
    path = resolve_path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path
