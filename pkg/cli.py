"""
Command-line front end for TiltStress

Exit codes: 0 success, 2 bad input or flags, 3 mathematically infeasible
request (NoBoundary, TargetUnreachable, FlatThreshold), 1 anything else.
"""

import argparse
import logging
import math
import time
from dataclasses import asdict, dataclass, field

from config import Config
from dominance import check_fsd
from errors import InfeasibleProblem, InvalidInput, InvalidParameter, TiltStressError
from ingest import FORMATS, load_distribution
from oracle import brute_force_V, run_verification
from scenario import sample, weighted_scenarios
from solver import (
    eps_crit,
    lambda_at_level,
    maximize_phi,
    severity_sweep,
    stress_report,
    sweep_frame,
    value_eps,
)
from tilt import TiltParams, kl_of_tilt, tilt, tilted_cdf_at_a
from utils import dump_csv, dump_json, file_digest, save_text

logger = logging.getLogger("TiltStress.CLI")

COMMANDS = (
    "tilt",
    "solve",
    "sweep",
    "lambda-boundary",
    "eps-crit",
    "check-fsd",
    "scenarios",
    "verify",
)

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    input: str = None
    input_format: str = None
    output: str = None
    output_format: str = "json"
    lam: float = None
    epsilon: float = None
    target: float = None
    a: float = None
    n: int = Config.DEFAULT_SCENARIOS
    seed: int = Config.DEFAULT_SEED
    grid: float = Config.DEFAULT_GRID
    instances: int = Config.DEFAULT_INSTANCES
    tol: float = Config.DEFAULT_EPS_TOL
    level: float = Config.DEFAULT_LEVEL
    lambdas: list = field(default_factory=list)
    weights: bool = False
    provided: tuple = ()

    def flags(self):
        """Flags the command accepts, for the report's inputs echo"""
        skip = {"command", "input", "output", "input_format", "provided"}
        out = {}
        for k, v in asdict(self).items():
            if k in skip or v is None or v == []:
                continue
            if self.provided and k not in self.provided:
                continue
            out["lambda" if k == "lam" else k] = v
        return out


def _finite(value, name):
    if value is not None and not math.isfinite(value):
        raise InvalidParameter(f"--{name} must be finite, got {value!r}")


def validate(config):
    """Check numeric flags against the operation preconditions before dispatch"""
    if config.command not in COMMANDS:
        raise InvalidParameter(f"unknown command '{config.command}'")
    if config.command != "verify" and not config.input:
        raise InvalidParameter(f"'{config.command}' needs --input")
    for name in ("lam", "epsilon", "target", "a", "grid", "tol", "level"):
        _finite(getattr(config, name), "lambda" if name == "lam" else name)

    needs_lambda = ("tilt", "check-fsd", "scenarios")
    if config.command in needs_lambda and config.lam is None:
        raise InvalidParameter(f"'{config.command}' needs --lambda")
    if config.lam is not None and config.lam <= 0:
        raise InvalidParameter(f"--lambda must be positive, got {config.lam!r}")
    if config.command == "solve" and (config.epsilon is None) == (config.lam is None):
        raise InvalidParameter("'solve' needs exactly one of --epsilon or --lambda")
    if config.epsilon is not None and config.epsilon < 0:
        raise InvalidParameter(f"--epsilon must be nonnegative, got {config.epsilon!r}")
    if config.command == "eps-crit":
        if config.target is None:
            raise InvalidParameter("'eps-crit' needs --target")
        if not 0.5 <= config.target < 1.0:
            raise InvalidParameter(f"--target must lie in [0.5, 1), got {config.target!r}")
    if config.command == "sweep" and not config.lambdas:
        raise InvalidParameter("'sweep' needs --lambdas")
    if config.n < 1:
        raise InvalidParameter(f"--n must be at least 1, got {config.n!r}")
    if config.instances < 1:
        raise InvalidParameter(f"--instances must be at least 1, got {config.instances!r}")
    low, high = Config.GRID_STEP_RANGE
    if not low <= config.grid <= high:
        raise InvalidParameter(f"--grid must lie in [{low}, {high}], got {config.grid!r}")
    if config.tol <= 0:
        raise InvalidParameter(f"--tol must be positive, got {config.tol!r}")
    if not 0.0 < config.level < 1.0:
        raise InvalidParameter(f"--level must lie in (0, 1), got {config.level!r}")
    csv_commands = ("sweep", "scenarios")
    if config.output_format == "csv" and config.command not in csv_commands:
        raise InvalidParameter(f"'{config.command}' has no CSV output")


class CommandRunner:
    """Loads the baseline, dispatches one command and writes its report"""

    def __init__(self, config):
        self.config = config
        self.baseline = None
        self.failed_checks = False
        self.handlers = {
            "tilt": self.run_tilt,
            "solve": self.run_solve,
            "sweep": self.run_sweep,
            "lambda-boundary": self.run_lambda_boundary,
            "eps-crit": self.run_eps_crit,
            "check-fsd": self.run_check_fsd,
            "scenarios": self.run_scenarios,
            "verify": self.run_verify,
        }

    def inputs(self):
        echo = {"command": self.config.command}
        if self.config.input:
            echo["input"] = self.config.input
            echo["input_sha256"] = file_digest(self.config.input)
        echo["flags"] = self.config.flags()
        return echo

    def _payload(self, result):
        return dump_json({"inputs": self.inputs(), "result": result})

    def _threshold(self):
        if self.config.a is not None:
            return self.config.a
        a, _ = maximize_phi(self.baseline, self.config.lam)
        return a

    def run_tilt(self):
        params = TiltParams(self.config.lam, self._threshold())
        t = tilt(self.baseline, params)
        return self._payload({
            "measure": t.to_dict(),
            "g_at_a": tilted_cdf_at_a(self.baseline, params),
            "kl": kl_of_tilt(self.baseline, params),
        })

    def run_solve(self):
        if self.config.epsilon is not None:
            report = value_eps(self.baseline, self.config.epsilon)
        else:
            report = stress_report(self.baseline, self.config.lam)
        return self._payload(report.to_dict())

    def run_sweep(self):
        rows = severity_sweep(self.baseline, self.config.lambdas)
        if self.config.output_format == "csv":
            return dump_csv(sweep_frame(rows))
        return self._payload([row.to_dict() for row in rows])

    def run_lambda_boundary(self):
        lam = lambda_at_level(self.baseline, self.config.level)
        return self._payload({"level": self.config.level, "lambda": lam})

    def run_eps_crit(self):
        eps = eps_crit(self.baseline, self.config.target, self.config.tol)
        return self._payload({"target": self.config.target, "eps_crit": eps})

    def run_check_fsd(self):
        t = tilt(self.baseline, TiltParams(self.config.lam, self._threshold()))
        ok, violation = check_fsd(self.baseline, t)
        return self._payload({"a": t.params.a, "fsd_ok": ok, "fsd_max_violation": violation})

    def run_scenarios(self):
        t = tilt(self.baseline, TiltParams(self.config.lam, self._threshold()))
        if self.config.weights:
            scenarios = weighted_scenarios(t)
        else:
            scenarios = sample(t, self.config.n, self.config.seed)
        if self.config.output_format == "csv":
            return dump_csv(scenarios.to_frame())
        return self._payload(scenarios.to_dict())

    def run_verify(self):
        summary = run_verification(self.config.instances, self.config.seed)
        if self.baseline is not None and self.config.epsilon:
            # end-to-end check of V_eps against the grid search on the input law
            dual = value_eps(self.baseline, self.config.epsilon).value
            grid = brute_force_V(self.baseline, self.config.epsilon, self.config.grid)
            gap = abs(dual - grid)
            summary["value_eps"] = dual
            summary["brute_force_V"] = grid
            summary["value_gap_ok"] = gap <= 2 * self.config.grid
            summary["passed"] = summary["passed"] and summary["value_gap_ok"]
        self.failed_checks = not summary["passed"]
        return self._payload(summary)

    def run(self):
        """Run one command; returns the process exit code"""
        logger.info("=" * 60)
        logger.info(f"🚀 {self.config.command}")
        start_time = time.time()

        try:
            validate(self.config)
            if self.config.input:
                self.baseline = load_distribution(self.config.input, self.config.input_format)
            text = self.handlers[self.config.command]()
            save_text(text, self.config.output)
        except InvalidInput as e:
            logger.error(f"❌ Invalid input: {e}")
            return EXIT_INPUT
        except InfeasibleProblem as e:
            logger.error(f"❌ Infeasible: {type(e).__name__}: {e}")
            return EXIT_INFEASIBLE
        except TiltStressError as e:
            logger.error(f"❌ {type(e).__name__}: {e}")
            return EXIT_INTERNAL
        except OSError as e:
            logger.error(f"❌ I/O error: {e}")
            return EXIT_INPUT
        except Exception:
            logger.exception("❌ Internal failure")
            return EXIT_INTERNAL

        elapsed = time.time() - start_time
        logger.info(f"✅ {self.config.command} completed in {elapsed:.2f}s")
        if self.failed_checks:
            logger.error("❌ Verification found failing instances")
            return EXIT_INTERNAL
        return EXIT_OK


def run(config):
    return CommandRunner(config).run()


def _lambda_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {e}") from e


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="baseline data (.csv with value[,weight] or .json)")
    common.add_argument("--input-format", choices=FORMATS, dest="input_format")
    common.add_argument("--output", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json", dest="output_format")

    parser = argparse.ArgumentParser(
        prog=Config.APP_NAME.lower(),
        description="Worst-case outperformance under KL ambiguity via exponential tilting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tilt", parents=[common], help="tilted law for a fixed lambda")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--a", type=float)

    p = sub.add_parser("solve", parents=[common], help="robust value for a radius or lambda")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--lambda", type=float, dest="lam")

    p = sub.add_parser("sweep", parents=[common], help="severity sweep over lambdas")
    p.add_argument("--lambdas", type=_lambda_list, default=[])

    p = sub.add_parser("lambda-boundary", parents=[common], help="lambda where max phi crosses a level")
    p.add_argument("--level", type=float, default=Config.DEFAULT_LEVEL)

    p = sub.add_parser("eps-crit", parents=[common], help="critical KL radius for a target")
    p.add_argument("--target", type=float)
    p.add_argument("--tol", type=float, default=Config.DEFAULT_EPS_TOL)

    p = sub.add_parser("check-fsd", parents=[common], help="dominance of the tilted law")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--a", type=float)

    p = sub.add_parser("scenarios", parents=[common], help="stressed scenario set")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--a", type=float)
    p.add_argument("--n", type=int, default=Config.DEFAULT_SCENARIOS)
    p.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    p.add_argument("--weights", action="store_true", help="importance weights instead of draws")

    p = sub.add_parser("verify", parents=[common], help="oracle equivalence on random instances")
    p.add_argument("--instances", type=int, default=Config.DEFAULT_INSTANCES)
    p.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--grid", type=float, default=Config.DEFAULT_GRID)
    return parser


def parse_args(argv=None):
    args = build_parser().parse_args(argv)
    known = set(RunConfig.__dataclass_fields__)
    values = {k: v for k, v in vars(args).items() if k in known}
    return RunConfig(**values, provided=tuple(values))


def main(argv=None):
    return run(parse_args(argv))
