"""
Linear-Quadratic Benchmark
dX = (a X + b u) dt + c dW in R^d with cost 1/2 (q|X|^2 + r|u|^2) dt + 1/2 s|X_T|^2
"""
import logging
import math
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate

from gpp.errors import ConfigError
from gpp.problem import SocpProblem

from .initial_laws import constant

logger = logging.getLogger(__name__)


class LqParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    d: int = Field(default=100, ge=1)
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    q: float = Field(default=2.0, ge=0)
    r: float = Field(default=2.0, gt=0)
    s: float = Field(default=1.0, ge=0)
    x0_value: float = 0.0


class RiccatiLQ:
    """
    Closed form of p' = -q - 2a p + (b^2/r) p^2, p(T) = s.

    With roots p1 > p2 of the right-hand side, w = (p - p1)/(p - p2) obeys
    w(t) = w(T) exp(2 sqrt(a^2 + q b^2/r) (t - T)).
    """

    def __init__(self, params: LqParams, T: float):
        if params.b == 0:
            raise ConfigError("LQ benchmark needs b != 0")
        self.params = params
        self.T = T
        self.alpha = params.b**2 / params.r
        self.root_gap = 2 * math.sqrt(params.a**2 + params.q * self.alpha)
        self.p1 = (2 * params.a + self.root_gap) / (2 * self.alpha)
        self.p2 = (2 * params.a - self.root_gap) / (2 * self.alpha)

    def p(self, t):
        t = np.asarray(t, dtype=float)
        s = self.params.s
        if self.root_gap == 0:
            # double root at 0 (a = q = 0): p = s / (1 + alpha s (T - t))
            return s / (1 + self.alpha * s * (self.T - t))
        if s == self.p2:
            return np.full_like(t, self.p2)
        gamma = (s - self.p1) / (s - self.p2)
        w = gamma * np.exp(self.root_gap * (t - self.T))
        return (self.p1 - w * self.p2) / (1 - w)

    def rhs(self, t, p):
        prm = self.params
        return -prm.q - 2 * prm.a * p + self.alpha * p**2

    def integral(self, t0: float = 0.0) -> float:
        value, _ = integrate.quad(lambda s: float(self.p(s)), t0, self.T, epsabs=1e-13, epsrel=1e-12)
        return value


class LqProblem(SocpProblem):
    name = "lq100"
    uses_z = False
    has_oracle = True

    def __init__(self, params: LqParams = LqParams(), T: float = 1.0):
        super().__init__(params.d, params.d, params.d, T, constant(np.full(params.d, params.x0_value)))
        self.params = params
        self.riccati = RiccatiLQ(params, T)

    def b(self, t, x, u):
        return self.params.a * x + self.params.b * u

    def sigma(self, t, x, u):
        return np.broadcast_to(self.params.c * np.eye(self.d), (x.shape[0], self.d, self.m))

    def sigma_dw(self, t, x, u, dw):
        return self.params.c * dw

    def f(self, t, x, u):
        return 0.5 * (self.params.q * np.sum(x**2, axis=1) + self.params.r * np.sum(u**2, axis=1))

    def g(self, x):
        return 0.5 * self.params.s * np.sum(x**2, axis=1)

    def grad_g(self, x):
        return self.params.s * x

    def dxH(self, t, x, y, z, u):
        return self.params.a * y + self.params.q * x

    def duH(self, t, x, y, z, u):
        return self.params.b * y + self.params.r * u

    def oracle_control(self, t, x, mu=None):
        return -(self.params.b / self.params.r) * self.riccati.p(t) * x

    def value(self, x0: np.ndarray) -> float:
        """1/2 p_0 |x0|^2 + 1/2 d c^2 int_0^T p_t dt"""
        x0 = np.asarray(x0, dtype=float)
        return 0.5 * float(self.riccati.p(0.0)) * float(x0 @ x0) \
            + 0.5 * self.d * self.params.c**2 * self.riccati.integral()


def riccati_lq(t, params: LqParams = LqParams(), T: float = 1.0):
    return RiccatiLQ(params, T).p(t)


def build(params: LqParams, case_id: Optional[str], T: float) -> LqProblem:
    if case_id is not None:
        raise ConfigError("lq100 has a deterministic initial state; case_id is not supported")
    return LqProblem(params, T)


def query_oracle(problem: LqProblem, query: str, args: List[str], n_mc: int, seed: int) -> Dict:
    args = [float(a) for a in args]
    if query == "p_t":
        (t,) = args
        return {"query": "p_t", "t": t, "value": float(problem.riccati.p(t))}
    if query == "u":
        t, x = args
        u = problem.oracle_control(t, np.full((1, problem.d), x))
        return {"query": "u", "t": t, "x": x, "value": u[0].tolist()}
    if query == "value":
        x0 = args[0] if args else problem.params.x0_value
        return {"query": "value", "x0": x0, "value": problem.value(np.full(problem.d, x0))}
    raise ConfigError(f"unknown lq100 oracle query '{query}', expected p_t, u or value")
