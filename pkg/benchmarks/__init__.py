"""
Benchmark Registry
The six benchmark problems addressable by string id, with their default run configurations
"""
from dataclasses import dataclass, field
import logging
from typing import Callable, Dict, List, Optional, Type

from pydantic import BaseModel, ValidationError

from gpp.config import LearningSchedule, RunConfig, format_validation_error
from gpp.errors import ConfigError, DuplicateProblemError, OracleUnavailableError, UnknownProblemError
from gpp.problem import SocpProblem

from . import hjb, interbank, lq, meanvar, priceimpact, sine

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_SAMPLES = 100_000

# short names accepted wherever a problem id is
ALIASES = {"lq": "lq100"}


@dataclass(frozen=True)
class BenchmarkEntry:
    problem_id: str
    params_model: Type[BaseModel]
    build: Callable[[BaseModel, Optional[str], float], SocpProblem]
    defaults: RunConfig
    description: str
    query_oracle: Optional[Callable] = None
    oracle_queries: tuple = ()
    reference_values: Dict[str, float] = field(default_factory=dict)

    def describe(self) -> Dict:
        return {
            "problem_id": self.problem_id,
            "description": self.description,
            "oracle_queries": list(self.oracle_queries),
            "params": self.params_model().model_dump(),
            "defaults": self.defaults.model_dump(),
            "reference_values": dict(self.reference_values),
        }


class ProblemRegistry:
    """Problem id -> BenchmarkEntry"""

    def __init__(self):
        self._entries: Dict[str, BenchmarkEntry] = {}

    def register(self, entry: BenchmarkEntry) -> None:
        if entry.problem_id in self._entries:
            raise DuplicateProblemError(f"problem id already registered: {entry.problem_id}")
        self._entries[entry.problem_id] = entry

    def get(self, problem_id: str) -> BenchmarkEntry:
        try:
            return self._entries[ALIASES.get(problem_id, problem_id)]
        except KeyError:
            raise UnknownProblemError(problem_id) from None

    def __contains__(self, problem_id: str) -> bool:
        return ALIASES.get(problem_id, problem_id) in self._entries

    def ids(self) -> List[str]:
        return list(self._entries)

    def list(self) -> List[BenchmarkEntry]:
        return list(self._entries.values())


def _defaults(problem_id: str, *, M: int, N: int, K: int, T: float, hidden_size: int,
              rho0: float, decay_power: float = 0.5, **extra) -> RunConfig:
    return RunConfig(problem_id=problem_id, M=M, N=N, K=K, T=T, hidden_size=hidden_size,
                     schedule=LearningSchedule(rho0=rho0, decay_power=decay_power), **extra)


# default ridge strengths are about 5e-5 per training particle
def register_all(registry: Optional[ProblemRegistry] = None) -> ProblemRegistry:
    registry = registry or ProblemRegistry()
    registry.register(BenchmarkEntry(
        "lq100", lq.LqParams, lq.build,
        _defaults("lq100", M=2000, N=20, K=100, T=1.0, hidden_size=256, rho0=0.4, ridge_lambda=0.1),
        "100-dimensional linear-quadratic control with a Riccati oracle",
        lq.query_oracle, ("p_t", "u", "value"),
    ))
    registry.register(BenchmarkEntry(
        "hjb", hjb.HjbParams, hjb.build,
        _defaults("hjb", M=2000, N=20, K=60, T=1.0, hidden_size=500, rho0=0.25, ridge_lambda=0.1),
        "100-dimensional HJB with quadratic running cost; Cole-Hopf Monte-Carlo oracle",
        hjb.query_oracle, ("v",),
    ))
    registry.register(BenchmarkEntry(
        "interbank", interbank.InterbankParams, interbank.build,
        _defaults("interbank", M=20000, N=20, K=40, T=1.0, hidden_size=128, rho0=0.4, ridge_lambda=1.0),
        "Inter-bank borrowing and lending (systemic risk) mean-field control",
        interbank.query_oracle, ("P_t", "u", "value"),
        {"case1": 0.1642, "case2": 0.1446, "case3": 0.1446, "case4": 0.1642, "case5": 0.1812,
         "case6": 0.1772},
    ))
    registry.register(BenchmarkEntry(
        "meanvar", meanvar.MeanVarParams, meanvar.build,
        _defaults("meanvar", M=20000, N=20, K=400, T=0.2, hidden_size=128, rho0=0.25, ridge_lambda=1.0,
                  case_id="case1"),
        "Mean-variance portfolio selection with controlled diffusion",
        meanvar.query_oracle, ("u", "value"),
        {"case1": -0.0865, "case2": -0.2059, "case3": -0.3060, "case4": 0.0719, "case5": 0.0488,
         "case6": -0.1192},
    ))
    registry.register(BenchmarkEntry(
        "priceimpact", priceimpact.PriceImpactParams, priceimpact.build,
        _defaults("priceimpact", M=10000, N=50, K=100, T=1.0, hidden_size=128, rho0=0.6, decay_power=0.4,
                  ridge_lambda=0.5),
        "Optimal liquidation with price impact; interaction through the law of the control",
        priceimpact.query_oracle, ("u", "eta", "chi", "mean"),
    ))
    registry.register(BenchmarkEntry(
        "sine", sine.SineParams, sine.build,
        _defaults("sine", M=5000, N=10, K=800, T=0.5, hidden_size=128, rho0=0.15, decay_power=0.2,
                  ridge_lambda=0.25),
        "Fitting sin(x) on [-2 pi, pi] by transporting (x, sin x) to the diagonal",
    ))
    return registry


_REGISTRY: Optional[ProblemRegistry] = None


def registry() -> ProblemRegistry:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = register_all()
    return _REGISTRY


def default_config(problem_id: str) -> RunConfig:
    return registry().get(problem_id).defaults


def parse_params(problem_id: str, params: Optional[Dict] = None) -> BaseModel:
    entry = registry().get(problem_id)
    try:
        return entry.params_model.model_validate(params or {})
    except ValidationError as e:
        raise ConfigError(f"invalid {problem_id} parameters: {format_validation_error(e)}") from e


def build_problem(problem_id: str, params: Optional[Dict] = None, case_id: Optional[str] = None,
                  T: Optional[float] = None) -> SocpProblem:
    entry = registry().get(problem_id)
    horizon = entry.defaults.T if T is None else T
    problem = entry.build(parse_params(problem_id, params), case_id, horizon)
    logger.info(f"Built {problem_id}: {problem.describe()}")
    return problem


def query_oracle(problem_id: str, query: str, args: List[str], params: Optional[Dict] = None,
                 case_id: Optional[str] = None, T: Optional[float] = None,
                 n_mc: int = DEFAULT_ORACLE_SAMPLES, seed: int = 0) -> Dict:
    entry = registry().get(problem_id)
    if entry.query_oracle is None:
        raise OracleUnavailableError(f"{problem_id} has no analytic oracle")
    problem = build_problem(problem_id, params, case_id=case_id, T=T)
    try:
        result = entry.query_oracle(problem, query, list(args), n_mc, seed)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad arguments for {problem_id} oracle query '{query}': {e}") from e
    return {"problem": problem_id, **result}


__all__ = ["BenchmarkEntry", "ProblemRegistry", "register_all", "registry", "default_config",
           "parse_params", "build_problem", "query_oracle"]
