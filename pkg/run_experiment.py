"""
Experiment Runner
Command-line entry point: solve, oracle, probe-unbiasedness, list-problems, serve

Exit codes: 0 ok, 1 probe failed, 2 configuration error, 3 numerical abort
"""
import argparse
import json
import logging
from pathlib import Path
import sys
from typing import Dict, List, Optional, Tuple

from dotenv import load_dotenv
import numpy as np

import benchmarks
from gpp.config import ExperimentFile, ProbeSettings, RunConfig, Settings
from gpp.errors import ConfigError, NumericalAbort, OracleUnavailableError, PolicyFormatError
from gpp.logging_utils import configure_logging
from gpp.parallel import resolve_threads
from gpp.probe import unbiasedness_probe
from gpp.problem import PolicySequence
from gpp.solver import feature_maps_for, resolve_problem, solve
from gpp.stochastics import SeedSpec

logger = logging.getLogger("run_experiment")

EXIT_OK = 0
EXIT_PROBE_FAILED = 1
EXIT_CONFIG = 2
EXIT_ABORT = 3


def _load_run_config(path: str, seed: Optional[int]) -> Tuple[ExperimentFile, RunConfig]:
    experiment = ExperimentFile.load(path)
    defaults = benchmarks.default_config(experiment.problem)
    return experiment, experiment.to_run_config(defaults, seed)


def _threads(cli_threads: Optional[int], experiment: ExperimentFile, settings: Settings) -> Optional[int]:
    for value in (cli_threads, experiment.threads, settings.threads):
        if value is not None:
            return value
    return None


def _run_id(config_path: str, config: RunConfig) -> str:
    return f"{Path(config_path).stem}_seed{config.seed}"


def cmd_solve(args, settings: Settings) -> int:
    from results_server import ReportStore

    experiment, config = _load_run_config(args.config, args.seed)
    out_dir = args.out or experiment.output_path or str(settings.output_dir)
    store = ReportStore(out_dir)
    run_id = _run_id(args.config, config)

    report = solve(config, threads=_threads(args.threads, experiment, settings))
    csv_path = store.save_report(run_id, report)
    policy_path = store.save_policy(run_id, report.policy)

    for key, value in report.summary().items():
        print(f"{key}={value}")
    print(f"report={csv_path}")
    print(f"policy={policy_path}")

    if report.abort is not None:
        print(f"numerical abort: {report.abort}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def _parse_param(text: str) -> Dict:
    if "=" not in text:
        raise ConfigError(f"--param expects key=value, got '{text}'")
    key, value = text.split("=", 1)
    try:
        return {key: json.loads(value)}
    except json.JSONDecodeError:
        return {key: value}


def cmd_oracle(args, settings: Settings) -> int:
    params: Dict = {}
    for item in args.param or []:
        params.update(_parse_param(item))
    if args.lam is not None:
        params["lam"] = args.lam
    result = benchmarks.query_oracle(args.problem, args.query, args.args, params=params,
                                     case_id=args.case, T=args.T, n_mc=args.nmc, seed=args.seed or 0)
    print(json.dumps(result, indent=2))
    return EXIT_OK


def _probe_policy(problem, config: RunConfig, mode: str) -> PolicySequence:
    if mode == "oracle":
        if not problem.has_oracle:
            raise OracleUnavailableError(f"{problem.name} has no oracle control to probe with")
        return PolicySequence.from_oracle(problem, config.N)
    times = np.arange(config.N) * config.dt
    return PolicySequence.zeros(feature_maps_for(problem, config), problem.d1, times,
                                problem.control_input_dims, config.clip)


def cmd_probe_unbiasedness(args, settings: Settings) -> int:
    experiment, config = _load_run_config(args.config, args.seed)
    probe = experiment.probe or ProbeSettings()
    problem = resolve_problem(config)
    policy = _probe_policy(problem, config, probe.policy)

    report = unbiasedness_probe(problem, policy, probe.n_outer, probe.n_inner, SeedSpec(config.seed),
                                n_roots=probe.n_roots, include_dxh=not args.drop_dxh,
                                threads=resolve_threads(_threads(args.threads, experiment, settings)))
    print(json.dumps(report.to_dict(), indent=2))
    print(f"status={'pass' if report.passed else 'fail'}")
    return EXIT_OK if report.passed else EXIT_PROBE_FAILED


def cmd_list_problems(args, settings: Settings) -> int:
    for entry in benchmarks.registry().list():
        cfg = entry.defaults
        print(f"{entry.problem_id:<12} M={cfg.M} N={cfg.N} K={cfg.K} L={cfg.hidden_size} "
              f"rho={cfg.schedule.rho0}*k^-{cfg.schedule.decay_power}  {entry.description}")
    return EXIT_OK


def cmd_serve(args, settings: Settings) -> int:
    from results_server import ReportStore, serve

    serve(args.host, args.port, ReportStore(args.out or str(settings.output_dir)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_experiment",
        description="Particle gradient projection solver for SOCP and MFC benchmarks",
    )
    parser.add_argument("--log-level", default=None, help="overrides PGP_LOG_LEVEL")
    parser.add_argument("--log-format", choices=["json", "text"], default=None, help="overrides PGP_LOG_FORMAT")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    common.add_argument("--threads", type=int, default=None, help="worker threads, 0 = all cores")
    common.add_argument("--out", default=None, help="output directory for reports and policies")

    p = sub.add_parser("solve", parents=[common], help="train a policy and write its report")
    p.add_argument("config", help="experiment JSON file")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("oracle", parents=[common], help="evaluate a benchmark oracle")
    p.add_argument("problem")
    p.add_argument("query")
    p.add_argument("args", nargs="*")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="HJB coupling lambda")
    p.add_argument("--nmc", type=int, default=benchmarks.DEFAULT_ORACLE_SAMPLES,
                   help="Monte-Carlo sample count for stochastic oracles")
    p.add_argument("--case", default=None, help="initial law case1..case6")
    p.add_argument("--T", type=float, default=None, help="horizon (defaults to the registered one)")
    p.add_argument("--param", action="append", help="problem parameter key=value, repeatable")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("probe-unbiasedness", parents=[common],
                       help="compare sample-wise and conditional adjoint estimates")
    p.add_argument("config", help="experiment JSON file with an optional 'probe' block")
    p.add_argument("--drop-dxh", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(handler=cmd_probe_unbiasedness)

    p = sub.add_parser("list-problems", help="list registered benchmark problems")
    p.set_defaults(handler=cmd_list_problems)

    p = sub.add_parser("serve", help="start the read-only results server")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--out", default=None, help="run directory to serve")
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_format)
    try:
        settings = Settings.from_env(dotenv=False)
        return args.handler(args, settings)
    except NumericalAbort as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return EXIT_ABORT
    except (ConfigError, OracleUnavailableError, PolicyFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
