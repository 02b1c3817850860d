"""
Sine Approximation Benchmark
Supervised learning as a control problem: the pair (x, sin x) is transported by
dX^1 = u(X^1) dt + sigma dW^1, dX^2 = sigma dW^2 with terminal cost 1/2 (X^1_T - X^2_T)^2
"""
import logging
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from gpp.errors import ConfigError
from gpp.problem import InitialLaw, SocpProblem

logger = logging.getLogger(__name__)


class SineParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma: float = Field(default=0.05, ge=0)
    x_low: float = -2 * math.pi
    x_high: float = math.pi

    @model_validator(mode="after")
    def _ordered(self):
        if not self.x_low < self.x_high:
            raise ValueError(f"x_low={self.x_low} must be below x_high={self.x_high}")
        return self


def sine_law(low: float, high: float) -> InitialLaw:
    """x uniform on [low, high] paired with its label sin x"""

    def draw(gen, rows):
        x = gen.uniform(low, high, rows)
        return np.stack([x, np.sin(x)], axis=1)

    return InitialLaw(draw, name=f"sine({low:g}, {high:g})")


class SineProblem(SocpProblem):
    name = "sine"
    uses_z = False
    control_input_dims = (0,)

    def __init__(self, params: SineParams = SineParams(), T: float = 0.5):
        super().__init__(2, 2, 1, T, sine_law(params.x_low, params.x_high))
        self.params = params

    def b(self, t, x, u):
        return np.concatenate([u, np.zeros_like(u)], axis=1)

    def sigma(self, t, x, u):
        return np.broadcast_to(self.params.sigma * np.eye(2), (x.shape[0], 2, 2))

    def sigma_dw(self, t, x, u, dw):
        return self.params.sigma * dw

    def f(self, t, x, u):
        return np.zeros(x.shape[0])

    def g(self, x):
        return 0.5 * (x[:, 0] - x[:, 1])**2

    def grad_g(self, x):
        gap = (x[:, 0] - x[:, 1])[:, None]
        return np.concatenate([gap, -gap], axis=1)

    def dxH(self, t, x, y, z, u):
        return np.zeros_like(x)

    def duH(self, t, x, y, z, u):
        return y[:, :1]


def build(params: SineParams, case_id: Optional[str], T: float) -> SineProblem:
    if case_id is not None:
        raise ConfigError("sine draws its own data law; case_id is not supported")
    return SineProblem(params, T)
