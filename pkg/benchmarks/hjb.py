"""
High-Dimensional HJB Benchmark
dX = 2 sqrt(lam) u dt + sqrt(2) dW with cost |u|^2 dt + g(X_T); exact value by Cole-Hopf
"""
import logging
import math
from typing import Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import logsumexp

from gpp.errors import ConfigError
from gpp.problem import SocpProblem
from gpp.stochastics import Family, Purpose, SeedSpec, draw_blocks

from .initial_laws import constant

logger = logging.getLogger(__name__)


class HjbParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    d: int = Field(default=100, ge=1)
    lam: float = Field(default=1.0, gt=0)
    terminal: Literal["g1", "g2"] = "g1"
    x0_scale: float = 0.0


def g1(x: np.ndarray) -> np.ndarray:
    return np.log(0.5 * (1 + np.sum(x**2, axis=1)))


def grad_g1(x: np.ndarray) -> np.ndarray:
    return 2 * x / (1 + np.sum(x**2, axis=1, keepdims=True))


def g2(x: np.ndarray) -> np.ndarray:
    inner = math.pi / 10 + x**2
    return np.mean(np.sin(x - math.pi / 2) + np.sin(1 / inner), axis=1)


def grad_g2(x: np.ndarray) -> np.ndarray:
    inner = math.pi / 10 + x**2
    d = x.shape[1]
    return (np.cos(x - math.pi / 2) - np.cos(1 / inner) * 2 * x / inner**2) / d


TERMINALS: Dict[str, Tuple[Callable, Callable]] = {"g1": (g1, grad_g1), "g2": (g2, grad_g2)}


class HjbProblem(SocpProblem):
    name = "hjb"
    uses_z = False

    def __init__(self, params: HjbParams = HjbParams(), T: float = 1.0):
        super().__init__(params.d, params.d, params.d, T, constant(np.full(params.d, params.x0_scale)))
        self.params = params
        self.scale = 2 * math.sqrt(params.lam)
        self._g, self._grad_g = TERMINALS[params.terminal]

    def b(self, t, x, u):
        return self.scale * u

    def sigma(self, t, x, u):
        return np.broadcast_to(math.sqrt(2) * np.eye(self.d), (x.shape[0], self.d, self.m))

    def sigma_dw(self, t, x, u, dw):
        return math.sqrt(2) * dw

    def f(self, t, x, u):
        return np.sum(u**2, axis=1)

    def g(self, x):
        return self._g(x)

    def grad_g(self, x):
        return self._grad_g(x)

    def dxH(self, t, x, y, z, u):
        return np.zeros_like(x)

    def duH(self, t, x, y, z, u):
        return 2 * u + self.scale * y


def cole_hopf_value(t: float, x: np.ndarray, lam: float, g: Callable[[np.ndarray], np.ndarray],
                    n_mc: int, seed: SeedSpec, T: float = 1.0) -> Tuple[float, float]:
    """
    v(t, x) = -(1/lam) ln E[exp(-lam g(x + sqrt(2) W_{T-t}))] and its delta-method SE.

    The exponent is shifted by its maximum (log-sum-exp) so large lam g does not overflow.
    """
    x = np.asarray(x, dtype=float).ravel()
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if t > T:
        raise ValueError(f"t={t} lies beyond the horizon T={T}")
    if t == T:
        return float(g(x[None, :])[0]), 0.0

    d = x.size
    scale = math.sqrt(2 * (T - t))

    def draw(gen, rows):
        return -lam * g(x + scale * gen.standard_normal((rows, d)))

    # draws are made 256 particles at a time; only the exponents are kept
    exponents = draw_blocks(seed, Family.NESTED, n_mc, draw)
    log_mean = logsumexp(exponents) - math.log(n_mc)
    value = -log_mean / lam

    w = np.exp(exponents - exponents.max())
    rel_se = w.std(ddof=1) / (w.mean() * math.sqrt(n_mc)) if n_mc > 1 else 0.0
    return float(value), float(rel_se / lam)


def build(params: HjbParams, case_id: Optional[str], T: float) -> HjbProblem:
    if case_id is not None:
        raise ConfigError("hjb has a deterministic initial state; case_id is not supported")
    return HjbProblem(params, T)


def query_oracle(problem: HjbProblem, query: str, args: List[str], n_mc: int, seed: int) -> Dict:
    args = [float(a) for a in args]
    if query != "v":
        raise ConfigError(f"unknown hjb oracle query '{query}', expected v")
    t, a = args
    x = np.full(problem.d, a)
    value, se = cole_hopf_value(t, x, problem.params.lam, problem.g, n_mc,
                                SeedSpec(seed).for_purpose(Purpose.ORACLE), problem.T)
    return {"query": "v", "t": t, "x": a, "lam": problem.params.lam, "value": value, "se": se}
