"""
Projected Gradient Solver
Outer loop: simulate, solve the adjoint backward, form gradient targets and
refit each time step's random-feature policy
"""
from dataclasses import dataclass, field
import logging
import math
import time
from typing import Callable, Dict, List, Optional

import numpy as np

from .config import LearningSchedule, RunConfig
from .diagnostics import DivergenceMonitor
from .engine import backward_adjoint, simulate_forward
from .errors import ConfigError, NumericalAbort
from .parallel import resolve_threads, thread_map
from .problem import PolicySequence, SocpProblem, as_mean_field, mf_args
from .randfeatures import FeatureMap, RidgeSpec, fit, new_feature_map
from .stochastics import Purpose, SeedSpec

logger = logging.getLogger(__name__)

__all__ = ["LearningSchedule", "RunConfig", "RunReport", "EpochRecord", "CostEstimate", "L2Error",
           "solve", "estimate_cost", "control_l2_error", "evaluate_policy", "feature_maps_for",
           "resolve_problem"]


@dataclass(frozen=True)
class CostEstimate:
    mean: float
    se: float


@dataclass(frozen=True)
class L2Error:
    absolute: float
    relative: float


@dataclass
class EpochRecord:
    epoch: int
    wall_seconds: float
    cost: float
    cost_se: float
    l2_error: Optional[float] = None
    l2_relative: Optional[float] = None
    diagnostics: List[Dict] = field(default_factory=list)


@dataclass
class RunReport:
    config: RunConfig
    records: List[EpochRecord]
    policy: PolicySequence
    abort: Optional[NumericalAbort] = None

    @property
    def completed(self) -> bool:
        return self.abort is None

    def summary(self) -> Dict:
        out = {"problem": self.config.problem_id, "seed": self.config.seed,
               "epochs": len(self.records), "status": "ok" if self.completed else "aborted"}
        if self.records:
            last = self.records[-1]
            out["cost"] = last.cost
            out["cost_se"] = last.cost_se
            if last.l2_error is not None:
                out["l2_error"] = last.l2_error
                out["l2_relative"] = last.l2_relative
        if self.abort is not None:
            out["abort"] = str(self.abort)
        return out


def resolve_problem(config: RunConfig, problem: Optional[SocpProblem] = None) -> SocpProblem:
    if problem is None:
        from benchmarks import build_problem
        problem = build_problem(config.problem_id, config.problem_params, case_id=config.case_id, T=config.T)
    elif not math.isclose(problem.T, config.T, rel_tol=1e-12):
        raise ConfigError(f"config T={config.T} does not match problem horizon T={problem.T}")

    if config.mode == "mfc":
        problem = as_mean_field(problem)
    elif config.mode == "socp" and problem.is_mean_field:
        raise ConfigError(f"{problem.name} is a mean-field problem and cannot run in socp mode")
    return problem


def feature_maps_for(problem: SocpProblem, config: RunConfig, epoch: int = 0) -> List[FeatureMap]:
    """One frozen feature map per time step; stream id is the step index"""
    counter = epoch if config.resample_features_each_epoch else 0
    base = SeedSpec(config.seed).for_purpose(Purpose.FEATURES, counter)
    return [new_feature_map(base.with_stream(n), problem.policy_input_dim, config.hidden_size, config.activation)
            for n in range(config.N)]


def evaluate_policy(problem: SocpProblem, policy: PolicySequence, M_eval: int, seed: SeedSpec,
                    oracle: Optional[Callable] = None, threads: int = 1):
    """
    One fresh forward simulation giving the Riemann-sum cost
    sum_n f(t_n, X_n, U_n) dt + g(X_N) (mean and SE over particles) and,
    when an oracle control is given, the L2 distance to it along the same paths.
    """
    ens = simulate_forward(problem, policy, M_eval, seed, threads)
    dt = ens.dt
    running = np.zeros(M_eval)
    sq_err = 0.0
    sq_ref = 0.0
    for n in range(ens.N):
        mu = ens.mu(n)
        x = ens.X[:, n]
        u = ens.U[:, n]
        running = running + problem.f(ens.times[n], x, u, *mf_args(problem, mu)) * dt
        if oracle is not None:
            u_star = np.asarray(oracle(ens.times[n], x, mu), dtype=float).reshape(u.shape)
            sq_err += float(np.sum((u - u_star) ** 2))
            sq_ref += float(np.sum(u_star ** 2))
    per_particle = running + problem.g(ens.X[:, ens.N], *mf_args(problem, ens.mu(ens.N)))

    se = float(per_particle.std(ddof=1) / math.sqrt(M_eval)) if M_eval > 1 else 0.0
    cost = CostEstimate(float(per_particle.mean()), se)
    if oracle is None:
        return cost, None
    count = ens.N * M_eval
    absolute = math.sqrt(sq_err / count)
    relative = math.sqrt(sq_err / sq_ref) if sq_ref > 0 else math.inf
    return cost, L2Error(absolute, relative)


def estimate_cost(problem: SocpProblem, policy: PolicySequence, M_eval: int, seed: SeedSpec,
                  threads: int = 1) -> CostEstimate:
    return evaluate_policy(problem, policy, M_eval, seed, threads=threads)[0]


def control_l2_error(policy: PolicySequence, oracle_control: Callable, problem: SocpProblem, M_eval: int,
                     seed: SeedSpec, threads: int = 1) -> L2Error:
    """sqrt((1/(N M)) sum_{n,i} |u_n(X_n^i) - u*(t_n, X_n^i, mu_n)|^2) along paths of the learned policy"""
    return evaluate_policy(problem, policy, M_eval, seed, oracle_control, threads)[1]


def solve(config: RunConfig, problem: Optional[SocpProblem] = None, threads: Optional[int] = None,
          on_epoch: Optional[Callable[[EpochRecord], None]] = None) -> RunReport:
    """
    Projected gradient descent on the policy.

    Epoch k = 1..K simulates under u^{k-1} (u^0 = 0), runs the adjoint pass,
    forms targets u^{k-1}_n(X_n) - rho_k grad_n and fits u^k_n by ridge
    regression; record k holds the metrics of u^k. A numerical abort stops the
    run and the report keeps the last valid policy.
    """
    problem = resolve_problem(config, problem)
    threads = resolve_threads(threads)
    N, M = config.N, config.M
    dt = config.dt
    times = np.arange(N) * dt
    ridge = RidgeSpec(config.ridge_lambda)
    clip = config.clip
    input_dims = problem.control_input_dims
    master = SeedSpec(config.seed)
    eval_seed = master.for_purpose(Purpose.EVALUATION, 0)
    oracle = problem.oracle_control if problem.has_oracle else None
    monitor = DivergenceMonitor()

    feature_maps = feature_maps_for(problem, config)
    policy = PolicySequence.zeros(feature_maps, problem.d1, times, input_dims, clip)
    records: List[EpochRecord] = []
    abort: Optional[NumericalAbort] = None

    logger.info(f"Solving {problem.name}: M={M}, N={N}, K={config.K}, L={config.hidden_size}, "
                f"threads={threads}")

    for k in range(1, config.K + 1):
        start = time.perf_counter()
        rho = config.schedule.rate(k)
        try:
            ens = simulate_forward(problem, policy, M, master.for_purpose(Purpose.TRAINING, k), threads)
            targets = np.empty((M, N, problem.d1))

            def on_step(n, y_next, z_n, y_n):
                t = ens.times[n]
                x = ens.X[:, n]
                u = ens.U[:, n]
                mu = ens.mu(n)
                y = y_next if config.y_index == "n_plus_1" else y_n
                grad = problem.duH(t, x, y, z_n, u, *mf_args(problem, mu))
                if problem.is_mean_field:
                    kernel = problem.dnuH_kernel(t, x, y, z_n, u, mu)
                    if kernel is not None:
                        grad = grad + kernel.average_at(u)
                step = u - rho * grad
                if not np.all(np.isfinite(step)):
                    raise NumericalAbort("gradient", n, "non-finite regression targets")
                targets[:, n] = step

            backward_adjoint(problem, ens, keep_z=False, on_step=on_step)

            if config.resample_features_each_epoch:
                feature_maps = feature_maps_for(problem, config, epoch=k)
            inputs = [problem.policy_inputs(ens.X[:, n]) for n in range(N)]
            models = thread_map(lambda n: fit(inputs[n], targets[:, n], feature_maps[n], ridge, clip,
                                              config.standardize_inputs),
                                range(N), threads)
            candidate = PolicySequence(models, times, input_dims)
            train_seconds = time.perf_counter() - start

            cost, l2 = evaluate_policy(problem, candidate, config.evaluation_M, eval_seed, oracle, threads)
            if not math.isfinite(cost.mean):
                raise NumericalAbort("evaluation", N, "non-finite cost estimate")
        except NumericalAbort as exc:
            abort = exc.at_epoch(k)
            logger.error(f"Run aborted: {abort}", extra={"epoch": k, "stage": exc.stage, "step": exc.step})
            break

        policy = candidate
        record = EpochRecord(
            epoch=k, wall_seconds=train_seconds, cost=cost.mean, cost_se=cost.se,
            l2_error=None if l2 is None else l2.absolute,
            l2_relative=None if l2 is None else l2.relative,
            diagnostics=monitor.check_epoch(k, cost.mean, policy),
        )
        records.append(record)
        logger.info(f"Epoch {k}/{config.K}: cost {cost.mean:.6g} +- {cost.se:.2g}",
                    extra={"epoch": k, "cost": cost.mean, "cost_se": cost.se,
                           "l2_error": record.l2_error, "wall_seconds": train_seconds})
        if on_epoch is not None:
            on_epoch(record)

    return RunReport(config=config, records=records, policy=policy, abort=abort)
