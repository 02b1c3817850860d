"""
Inter-Bank Systemic Risk Benchmark
Linear-quadratic mean-field control of log-monetary reserves:
dX = (kappa (E[X] - X) + u) dt + sigma dW,
cost 1/2 u^2 - q u (E[X] - X) + eta/2 (E[X] - X)^2 and c/2 (E[X_T] - X_T)^2
"""
import logging
import math
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import integrate

from gpp.errors import ConfigError
from gpp.problem import FactorizedKernel, InitialLaw, MfcProblem

from .initial_laws import case_law, normal

logger = logging.getLogger(__name__)


def _unit_basis(points: np.ndarray) -> np.ndarray:
    return np.ones((points.shape[0], 1, 1))


class InterbankParams(BaseModel):
    """Defaults follow the commonly used systemic-risk setup; Table-style case runs set them explicitly"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kappa: float = 0.6
    q: float = 0.8
    eta: float = 2.0
    c: float = Field(default=2.0, ge=0)
    sigma: float = Field(default=0.5, ge=0)
    initial_variance: float = Field(default=0.25, ge=0)

    @model_validator(mode="after")
    def _real_roots(self):
        if self.kappa**2 + 2 * self.kappa * self.q + self.eta < 0:
            raise ValueError("parameters violate kappa^2 + 2 kappa q + eta >= 0")
        return self


class RiccatiInterbank:
    """P' = 2(kappa + q) P + 2 P^2 + 1/2 (q^2 - eta), P(T) = c/2"""

    def __init__(self, params: InterbankParams, T: float):
        disc = params.kappa**2 + 2 * params.kappa * params.q + params.eta
        if disc < 0:
            raise ConfigError("parameters violate kappa^2 + 2 kappa q + eta >= 0")
        self.params = params
        self.T = T
        self.gamma = math.sqrt(disc)
        self.r1 = (-(params.kappa + params.q) + self.gamma) / 2
        self.r2 = (-(params.kappa + params.q) - self.gamma) / 2
        terminal = params.c / 2
        self.C = None if terminal == self.r2 else (terminal - self.r1) / (terminal - self.r2)

    def P(self, t):
        t = np.asarray(t, dtype=float)
        if self.gamma == 0:
            # double root r = -(kappa + q)/2
            r = self.r1
            return r + 1 / (1 / (self.params.c / 2 - r) + 2 * (self.T - t))
        if self.C is None:
            return np.full_like(t, self.r2)
        w = self.C * np.exp(-2 * self.gamma * (self.T - t))
        return (self.r1 - self.r2 * w) / (1 - w)

    def rhs(self, t, P):
        prm = self.params
        return 2 * (prm.kappa + prm.q) * P + 2 * P**2 + 0.5 * (prm.q**2 - prm.eta)

    def integral(self, t0: float = 0.0) -> float:
        value, _ = integrate.quad(lambda s: float(self.P(s)), t0, self.T, epsabs=1e-13, epsrel=1e-12)
        return value


class InterbankProblem(MfcProblem):
    name = "interbank"
    uses_z = False
    has_oracle = True

    def __init__(self, params: InterbankParams = InterbankParams(), T: float = 1.0,
                 initial_law: Optional[InitialLaw] = None):
        law = initial_law or normal(0.0, params.initial_variance)
        super().__init__(1, 1, 1, T, law)
        self.params = params
        self.riccati = RiccatiInterbank(params, T)

    def b(self, t, x, u, mu):
        return self.params.kappa * (mu.mean_state - x) + u

    def sigma(self, t, x, u, mu):
        return np.full((x.shape[0], 1, 1), self.params.sigma)

    def sigma_dw(self, t, x, u, dw, mu):
        return self.params.sigma * dw

    def f(self, t, x, u, mu):
        gap = (mu.mean_state - x)[:, 0]
        return 0.5 * u[:, 0]**2 - self.params.q * u[:, 0] * gap + 0.5 * self.params.eta * gap**2

    def g(self, x, mu):
        return 0.5 * self.params.c * ((mu.mean_state - x)[:, 0])**2

    def grad_g(self, x, mu):
        return self.params.c * (x - mu.mean_state)

    def terminal_kernel(self, x, mu):
        return FactorizedKernel(self.params.c * (mu.mean_state - x), _unit_basis)

    def dxH(self, t, x, y, z, u, mu):
        prm = self.params
        return -prm.kappa * y + prm.q * u + prm.eta * (x - mu.mean_state)

    def dmuH_kernel(self, t, x, y, z, u, mu):
        prm = self.params
        weights = prm.kappa * y - prm.q * u + prm.eta * (mu.mean_state - x)
        return FactorizedKernel(weights, _unit_basis)

    def duH(self, t, x, y, z, u, mu):
        return y + u - self.params.q * (mu.mean_state - x)

    def oracle_control(self, t, x, mu=None):
        mean = 0.0 if mu is None else mu.mean_state
        return -(2 * self.riccati.P(t) + self.params.q) * (x - mean)

    def value(self, variance: Optional[float] = None) -> float:
        """P_0 Var(X_0) + sigma^2 int_0^T P_t dt"""
        variance = self.initial_law.variance if variance is None else variance
        return float(self.riccati.P(0.0)) * variance + self.params.sigma**2 * self.riccati.integral()


def riccati_interbank(t, params: InterbankParams = InterbankParams(), T: float = 1.0):
    return RiccatiInterbank(params, T).P(t)


def build(params: InterbankParams, case_id: Optional[str], T: float) -> InterbankProblem:
    law = case_law(case_id) if case_id is not None else None
    return InterbankProblem(params, T, law)


def query_oracle(problem: InterbankProblem, query: str, args: List[str], n_mc: int, seed: int) -> Dict:
    args = [float(a) for a in args]
    if query == "P_t":
        (t,) = args
        return {"query": "P_t", "t": t, "value": float(problem.riccati.P(t))}
    if query == "u":
        t, x = args[:2]
        mean = args[2] if len(args) > 2 else 0.0
        u = -(2 * float(problem.riccati.P(t)) + problem.params.q) * (x - mean)
        return {"query": "u", "t": t, "x": x, "mean": mean, "value": u}
    if query == "value":
        return {"query": "value", "initial_law": problem.initial_law.name, "value": problem.value()}
    raise ConfigError(f"unknown interbank oracle query '{query}', expected P_t, u or value")
