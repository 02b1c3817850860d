"""
Mean-Variance Portfolio Benchmark
dX = (r X + rho u) dt + theta u dW, terminal cost eta/2 Var(X_T) - E[X_T]
"""
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gpp.errors import ConfigError, OracleUnavailableError
from gpp.problem import FactorizedKernel, InitialLaw, MeasureSummary, MfcProblem
from gpp.stochastics import Family, Purpose, SeedSpec, draw_blocks

from .initial_laws import case_law

logger = logging.getLogger(__name__)


def _unit_basis(points: np.ndarray) -> np.ndarray:
    return np.ones((points.shape[0], 1, 1))


class MeanVarParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    r: float = 0.0
    rho: float = 0.1
    theta: float = Field(default=0.4, gt=0)
    eta: float = Field(default=1.0, gt=0)


class MeanVarProblem(MfcProblem):
    name = "meanvar"
    has_oracle = True

    def __init__(self, params: MeanVarParams = MeanVarParams(), T: float = 0.2,
                 initial_law: Optional[InitialLaw] = None):
        super().__init__(1, 1, 1, T, initial_law or case_law("case1"))
        self.params = params
        self.ratio = params.rho**2 / params.theta**2

    def b(self, t, x, u, mu):
        return self.params.r * x + self.params.rho * u

    def sigma(self, t, x, u, mu):
        return (self.params.theta * u)[:, :, None]

    def sigma_dw(self, t, x, u, dw, mu):
        return self.params.theta * u * dw

    def f(self, t, x, u, mu):
        return np.zeros(x.shape[0])

    def g(self, x, mu):
        eta = self.params.eta
        return 0.5 * eta * x[:, 0]**2 - 0.5 * eta * float(mu.mean_state[0])**2 - x[:, 0]

    def grad_g(self, x, mu):
        return self.params.eta * x - 1.0

    def terminal_kernel(self, x, mu):
        weights = np.full((x.shape[0], 1), -self.params.eta * float(mu.mean_state[0]))
        return FactorizedKernel(weights, _unit_basis)

    def dxH(self, t, x, y, z, u, mu):
        return self.params.r * y

    def duH(self, t, x, y, z, u, mu):
        return self.params.rho * y + self.params.theta * z[:, :, 0]

    def _require_closed_form(self):
        if self.params.r != 0:
            raise OracleUnavailableError("mean-variance closed forms need r = 0")

    def oracle_control(self, t, x, mu=None):
        """u* = -(rho/theta^2)(x - E[X] - (1/eta) exp(-(rho^2/theta^2)(T - t)))"""
        self._require_closed_form()
        mean = x.mean(axis=0) if mu is None else mu.mean_state
        return meanvar_oracle_control(t, x, mean, self.params, self.T)

    def value_at(self, x0: np.ndarray, mean: float, t: float = 0.0) -> np.ndarray:
        """V(t, x0, mu0) per draw"""
        self._require_closed_form()
        eta = self.params.eta
        tau = self.T - t
        return 0.5 * eta * math.exp(-self.ratio * tau) * (x0 - mean)**2 - x0 \
            - (math.exp(self.ratio * tau) - 1) / (2 * eta)

    def value(self) -> float:
        """Closed form in the mean and variance of the initial law"""
        law = self.initial_law
        if law.mean is None or law.variance is None:
            raise OracleUnavailableError(f"initial law {law.name} has no closed-form moments")
        self._require_closed_form()
        eta = self.params.eta
        return 0.5 * eta * math.exp(-self.ratio * self.T) * law.variance - law.mean \
            - (math.exp(self.ratio * self.T) - 1) / (2 * eta)


def meanvar_oracle_control(t, x, mean_x, params: MeanVarParams = MeanVarParams(), T: float = 0.2):
    prm = params
    shift = math.exp(-(prm.rho**2 / prm.theta**2) * (T - t)) / prm.eta
    return -(prm.rho / prm.theta**2) * (np.asarray(x) - mean_x - shift)


def meanvar_oracle_value(problem: MeanVarProblem, n_mc: int, seed: SeedSpec) -> Tuple[float, float]:
    """Monte-Carlo average of V(0, X0, mu0) with the sample mean standing in for E[X0]"""
    x0 = draw_blocks(seed, Family.INITIAL, n_mc, problem.initial_law.draw)[:, 0]
    values = problem.value_at(x0, float(x0.mean()))
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n_mc))


def build(params: MeanVarParams, case_id: Optional[str], T: float) -> MeanVarProblem:
    law = case_law(case_id) if case_id is not None else None
    return MeanVarProblem(params, T, law)


def query_oracle(problem: MeanVarProblem, query: str, args: List[str], n_mc: int, seed: int) -> Dict:
    if query == "u":
        t, x, mean = (float(a) for a in args)
        mu = MeasureSummary(mean_state=np.array([mean]))
        u = float(problem.oracle_control(t, np.array([[x]]), mu)[0, 0])
        return {"query": "u", "t": t, "x": x, "mean": mean, "value": u}
    if query == "value":
        if args:
            problem = MeanVarProblem(problem.params, problem.T, case_law(str(args[0])))
        value, se = meanvar_oracle_value(problem, n_mc, SeedSpec(seed).for_purpose(Purpose.ORACLE))
        return {"query": "value", "initial_law": problem.initial_law.name, "value": value, "se": se,
                "closed_form": problem.value()}
    raise ConfigError(f"unknown meanvar oracle query '{query}', expected u or value")
