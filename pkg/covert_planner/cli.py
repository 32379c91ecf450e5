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
Command-line entry point

Subcommands:
    train       train a covert policy (trace.csv, policy.json, summary.json)
    evaluate    Monte Carlo value / detection of a policy file
    cross-eval  detection table of several policies under several slips
    verify      oracle property suites (oracle, gradients, theorem1, all)
    presets     list the experiment presets

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

import argparse
import sys
from typing import Optional, Sequence

from loguru import logger

from covert_planner.config import ExperimentConfig
from covert_planner.errors import CovertPlannerError
from covert_planner.presets import EXPERIMENT_PRESETS
from covert_planner.service import CovertPlannerCore

LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR")


class _Parser(argparse.ArgumentParser):
    """Usage errors are validation errors (exit 1)"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def positive_int(text: str) -> int:
    """argparse type for counts that must be at least 1"""
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def setup_logging(level: str = "INFO"):
    """Single stderr sink; library code never adds sinks"""
    logger.remove()
    logger.add(
        sys.stderr,
        level=level,
        format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}",
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment config file (YAML or JSON)")
    common.add_argument("--preset", help="Experiment preset name (see `presets`)")
    common.add_argument("--seed", type=int, help="Random seed")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="Config override, e.g. hyper.eta=0.01")
    common.add_argument("--log-level", choices=LOG_LEVELS, help="Log level (default from config)")

    parser = _Parser(prog="covert-planner", description="Covert optimal planning toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    train = sub.add_parser("train", parents=[common], help="Train a covert policy")
    train.add_argument("--no-baselines", action="store_true",
                       help="Skip the deterministic / softmax optimal baselines")

    evaluate = sub.add_parser("evaluate", parents=[common], help="Evaluate a policy file")
    evaluate.add_argument("--policy", required=True, help="policy.json to evaluate")
    evaluate.add_argument("--samples", type=positive_int, help="Number of sampled runs")
    evaluate.add_argument("--slip", type=float, help="Evaluate under this gridworld slip")

    cross = sub.add_parser("cross-eval", parents=[common], help="Policy x slip detection table")
    cross.add_argument("--policies", nargs="+", required=True, help="policy.json files")
    cross.add_argument("--slips", nargs="+", type=float, help="Slip values (default from config)")
    cross.add_argument("--samples", type=positive_int, help="Number of sampled runs per cell")

    verify = sub.add_parser("verify", help="Run oracle property suites")
    verify.add_argument("suite", nargs="?", default="all", help="oracle | gradients | theorem1 | all")
    verify.add_argument("--log-level", choices=LOG_LEVELS, default="INFO")

    sub.add_parser("presets", help="List experiment presets")
    return parser


def _load_config(core: CovertPlannerCore, args: argparse.Namespace) -> ExperimentConfig:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.out:
        overrides.append(f"output_dir={args.out}")
    config = core.load_config(args.config, args.preset, overrides)
    if args.log_level is None:
        setup_logging(config.log_level)
    return config


def cmd_train(core: CovertPlannerCore, args: argparse.Namespace) -> int:
    config = _load_config(core, args)
    result = core.train(config, skip_baselines=args.no_baselines)
    last = result.trace.last
    print(f"iterations: {result.iterations} (converged: {result.converged})")
    print(f"value: {last.value:.4f}")
    print(f"detection: {last.detection:.4f}")
    print(f"lambda: {result.lam:.4f}")
    print(f"output: {config.output_dir}")
    return 0


def cmd_evaluate(core: CovertPlannerCore, args: argparse.Namespace) -> int:
    config = _load_config(core, args)
    summary = core.evaluate(config, args.policy, n_samples=args.samples, slip_beta=args.slip,
                            output_dir=args.out)
    print(f"value: {summary.value_mean:.4f} ± {summary.value_se:.4f}")
    print(f"detection: {summary.detection_mean:.4f} ± {summary.detection_se:.4f}")
    print(f"samples: {summary.n_samples}")
    return 0


def cmd_cross_eval(core: CovertPlannerCore, args: argparse.Namespace) -> int:
    config = _load_config(core, args)
    slips = args.slips or config.evaluation.slips
    rows = core.cross_evaluate(config, args.policies, slips=slips, n_samples=args.samples)
    for row in rows:
        cells = [f"{float(row[k]):.3f} ± {float(row[k + 1]):.3f}" for k in range(1, len(row), 2)]
        print(f"{row[0]}: " + "  ".join(f"[{slip}] {cell}" for slip, cell in zip(slips, cells)))
    return 0


def cmd_verify(core: CovertPlannerCore, args: argparse.Namespace) -> int:
    results = core.verify(args.suite)
    for result in results:
        print(result.describe())
    return 0 if all(r.passed for r in results) else 2


def cmd_presets() -> int:
    for preset in EXPERIMENT_PRESETS:
        print(f"{preset['name']}: {preset['description']}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging("WARNING" if args.command == "presets" else (args.log_level or "INFO"))

    if args.command == "presets":
        return cmd_presets()

    core = CovertPlannerCore()
    commands = {
        "train": cmd_train,
        "evaluate": cmd_evaluate,
        "cross-eval": cmd_cross_eval,
        "verify": cmd_verify,
    }
    try:
        return commands[args.command](core, args)
    except CovertPlannerError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
