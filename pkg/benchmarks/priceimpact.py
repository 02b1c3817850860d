"""
Price Impact Benchmark
Optimal liquidation where traders interact through the law of their controls:
dX = a dt + sigma dW, cost c_alpha/2 a^2 + c_X/2 X^2 - gamma X E[a] and c_g/2 X_T^2
"""
import logging
import math
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate

from gpp.errors import ConfigError
from gpp.problem import FactorizedKernel, InitialLaw, MfcProblem

from .initial_laws import case_law, normal

logger = logging.getLogger(__name__)

ODE_TOL = 1e-12


def _unit_basis(points: np.ndarray) -> np.ndarray:
    return np.ones((points.shape[0], 1, 1))


class PriceImpactParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    c_alpha: float = Field(default=2.0, gt=0)
    c_X: float = Field(default=2.0, ge=0)
    gamma: float = 1.0
    c_g: float = Field(default=0.3, ge=0)
    sigma: float = Field(default=0.5, ge=0)
    x0_mean: float = 5.0
    x0_variance: float = Field(default=0.3, ge=0)


class PriceImpactODE:
    """
    Exact solution of the linear-quadratic extended MFC.

    eta' = eta^2/c_alpha - c_X,                     eta(T) = c_g
    chi' = ((chi - gamma)^2 + 2 eta (chi - gamma)) / c_alpha,    chi(T) = 0
    m'   = -(eta + chi - gamma) m / c_alpha,         m(0) = E[X_0]

    The optimal feedback is a*(t, x) = -(eta_t x + (chi_t - gamma) m_t) / c_alpha.
    """

    def __init__(self, params: PriceImpactParams, T: float):
        self.params = params
        self.T = T
        backward = integrate.solve_ivp(self.rhs, (T, 0.0), [params.c_g, 0.0], method="DOP853",
                                       rtol=ODE_TOL, atol=ODE_TOL, dense_output=True)
        if not backward.success:
            raise ConfigError(f"price impact Riccati system failed: {backward.message}")
        self._backward = backward.sol
        forward = integrate.solve_ivp(self.mean_rhs, (0.0, T), [params.x0_mean], method="DOP853",
                                      rtol=ODE_TOL, atol=ODE_TOL, dense_output=True)
        if not forward.success:
            raise ConfigError(f"price impact mean equation failed: {forward.message}")
        self._forward = forward.sol

    def rhs(self, t, state):
        eta, chi = state
        prm = self.params
        shifted = chi - prm.gamma
        return [eta**2 / prm.c_alpha - prm.c_X,
                (shifted**2 + 2 * eta * shifted) / prm.c_alpha]

    def mean_rhs(self, t, state):
        eta, chi = self._backward(t)
        return [-(eta + chi - self.params.gamma) * state[0] / self.params.c_alpha]

    def eta(self, t):
        return self._backward(t)[0]

    def chi(self, t):
        return self._backward(t)[1]

    def mean(self, t):
        return self._forward(t)[0]

    def control(self, t, x):
        prm = self.params
        return -(self.eta(t) * np.asarray(x) + (self.chi(t) - prm.gamma) * self.mean(t)) / prm.c_alpha

    def eta_closed_form(self, t):
        """Riccati solution eta for gamma = 0 (tanh form)"""
        prm = self.params
        a = math.sqrt(prm.c_X * prm.c_alpha)
        k = math.sqrt(prm.c_X / prm.c_alpha)
        th = np.tanh(k * (self.T - np.asarray(t, dtype=float)))
        return a * (prm.c_g + a * th) / (a + prm.c_g * th)


class PriceImpactProblem(MfcProblem):
    name = "priceimpact"
    uses_z = False
    has_oracle = True

    def __init__(self, params: PriceImpactParams = PriceImpactParams(), T: float = 1.0,
                 initial_law: Optional[InitialLaw] = None):
        law = initial_law or normal(params.x0_mean, params.x0_variance)
        super().__init__(1, 1, 1, T, law)
        self.params = params
        self._ode: Optional[PriceImpactODE] = None

    @property
    def ode(self) -> PriceImpactODE:
        if self._ode is None:
            self._ode = PriceImpactODE(self.params, self.T)
        return self._ode

    def b(self, t, x, u, mu):
        return u

    def sigma(self, t, x, u, mu):
        return np.full((x.shape[0], 1, 1), self.params.sigma)

    def sigma_dw(self, t, x, u, dw, mu):
        return self.params.sigma * dw

    def _mean_control(self, u, mu) -> float:
        if mu is not None and mu.mean_control is not None:
            return float(mu.mean_control[0])
        return float(u.mean())

    def f(self, t, x, u, mu):
        prm = self.params
        return 0.5 * prm.c_alpha * u[:, 0]**2 + 0.5 * prm.c_X * x[:, 0]**2 \
            - prm.gamma * x[:, 0] * self._mean_control(u, mu)

    def g(self, x, mu):
        return 0.5 * self.params.c_g * x[:, 0]**2

    def grad_g(self, x, mu):
        return self.params.c_g * x

    def dxH(self, t, x, y, z, u, mu):
        return self.params.c_X * x - self.params.gamma * self._mean_control(u, mu)

    def duH(self, t, x, y, z, u, mu):
        return y + self.params.c_alpha * u

    def dnuH_kernel(self, t, x, y, z, u, mu):
        # derivative of -gamma x E[a] in the control law, constant in the evaluation point
        return FactorizedKernel(-self.params.gamma * x, _unit_basis)

    def oracle_control(self, t, x, mu=None):
        return self.ode.control(t, x)


def priceimpact_oracle_control(t, x, mean_x: Optional[float] = None,
                               params: PriceImpactParams = PriceImpactParams(), T: float = 1.0):
    """a*(t, x); mean_x replaces the population mean m_t of the optimally controlled system when given"""
    ode = PriceImpactODE(params, T)
    if mean_x is None:
        return ode.control(t, x)
    return -(ode.eta(t) * np.asarray(x) + (ode.chi(t) - params.gamma) * mean_x) / params.c_alpha


def build(params: PriceImpactParams, case_id: Optional[str], T: float) -> PriceImpactProblem:
    if case_id is not None:
        law = case_law(case_id)
        params = params.model_copy(update={"x0_mean": law.mean, "x0_variance": law.variance})
        return PriceImpactProblem(params, T, law)
    return PriceImpactProblem(params, T)


def query_oracle(problem: PriceImpactProblem, query: str, args: List[str], n_mc: int, seed: int) -> Dict:
    args = [float(a) for a in args]
    ode = problem.ode
    if query == "u":
        t, x = args
        return {"query": "u", "t": t, "x": x, "value": float(ode.control(t, x))}
    if query in ("eta", "chi", "mean"):
        (t,) = args
        return {"query": query, "t": t, "value": float(getattr(ode, query)(t))}
    raise ConfigError(f"unknown priceimpact oracle query '{query}', expected u, eta, chi or mean")
