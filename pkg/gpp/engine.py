"""
Particle Engine
Forward Euler-Maruyama simulation and sample-wise backward adjoint recursions
"""
from dataclasses import dataclass
import logging
from typing import Callable, List, Optional

import numpy as np

from .errors import DimensionError, NumericalAbort
from .problem import MeasureSummary, MfcProblem, PolicySequence, SocpProblem, mf_args
from .stochastics import BrownianIncrements, Family, SeedSpec, brownian_increments, draw_blocks

logger = logging.getLogger(__name__)

StepCallback = Callable[[int, np.ndarray, Optional[np.ndarray], np.ndarray], None]


@dataclass
class ParticleEnsemble:
    X: np.ndarray                  # (M, N+1, d)
    U: np.ndarray                  # (M, N, d1)
    dW: BrownianIncrements         # (M, N, m)
    times: np.ndarray              # (N+1,)
    Y: Optional[np.ndarray] = None  # (M, N+1, d)
    Z: Optional[np.ndarray] = None  # (M, N, d, m)
    mu_path: Optional[List[MeasureSummary]] = None

    @property
    def M(self) -> int:
        return self.X.shape[0]

    @property
    def N(self) -> int:
        return self.U.shape[1]

    @property
    def dt(self) -> float:
        return self.dW.dt

    def mu(self, n: int) -> Optional[MeasureSummary]:
        return None if self.mu_path is None else self.mu_path[n]


def _check_finite(values: np.ndarray, stage: str, step: int, what: str) -> None:
    if not np.all(np.isfinite(values)):
        bad = int(np.count_nonzero(~np.isfinite(values)))
        raise NumericalAbort(stage, step, f"{bad} non-finite entries in {what}")


def sample_initial(problem: SocpProblem, M: int, seed: SeedSpec, threads: int = 1) -> np.ndarray:
    x0 = draw_blocks(seed, Family.INITIAL, M, problem.initial_law.draw, threads)
    x0 = np.asarray(x0, dtype=float).reshape(M, problem.d)
    return x0


def simulate_forward(problem: SocpProblem, policy: PolicySequence, M: int, seed: SeedSpec,
                     threads: int = 1, x0: Optional[np.ndarray] = None,
                     dW: Optional[BrownianIncrements] = None) -> ParticleEnsemble:
    """
    Euler-Maruyama paths of M particles under `policy`.

    For MFC problems the population summary at step n is taken from the
    current ensemble before stepping; the control is evaluated against the
    state summary and the full summary (with the mean control) then enters
    the coefficients.
    """
    N = policy.N
    dt = problem.T / N
    if dW is None:
        dW = brownian_increments(seed, M, N, problem.m, dt, threads)
    if dW.shape != (M, N, problem.m):
        raise DimensionError(f"increments shape {dW.shape} does not match ({M}, {N}, {problem.m})")
    if x0 is None:
        x0 = sample_initial(problem, M, seed, threads)

    mean_field = problem.is_mean_field
    times = np.arange(N + 1) * dt
    X = np.empty((M, N + 1, problem.d))
    U = np.empty((M, N, problem.d1))
    X[:, 0] = x0
    mu_path: Optional[List[MeasureSummary]] = [] if mean_field else None

    for n in range(N):
        t = times[n]
        x = X[:, n]
        mu = None
        if mean_field:
            u = policy.control(n, x, problem.summary(x))
            mu = problem.summary(x, u)
            mu_path.append(mu)
        else:
            u = policy.control(n, x)
        if u.shape != (M, problem.d1):
            raise DimensionError(f"control at step {n} has shape {u.shape}, expected ({M}, {problem.d1})")
        _check_finite(u, "forward", n, "controls")
        U[:, n] = u

        extra = mf_args(problem, mu)
        X[:, n + 1] = x + problem.b(t, x, u, *extra) * dt + problem.sigma_dw(t, x, u, dW.step(n), *extra)
        _check_finite(X[:, n + 1], "forward", n, "states")

    if mean_field:
        mu_path.append(problem.summary(X[:, N]))
    return ParticleEnsemble(X=X, U=U, dW=dW, times=times, mu_path=mu_path)


def _backward(problem: SocpProblem, ens: ParticleEnsemble, mean_field: bool, keep_z: bool,
              include_dxh: bool, on_step: Optional[StepCallback]) -> ParticleEnsemble:
    M, N, dt = ens.M, ens.N, ens.dt
    x_T = ens.X[:, N]
    mu_T = ens.mu(N)
    extra = mf_args(problem, mu_T)

    Y = np.empty((M, N + 1, problem.d))
    y_T = problem.grad_g(x_T, *extra)
    if mean_field:
        kernel = problem.terminal_kernel(x_T, mu_T)
        if kernel is not None:
            y_T = y_T + kernel.average_at(x_T)
    _check_finite(y_T, "backward", N, "terminal adjoint")
    Y[:, N] = y_T

    want_z = problem.uses_z
    Z = np.empty((M, N, problem.d, problem.m)) if (keep_z and want_z) else None

    for n in reversed(range(N)):
        t = ens.times[n]
        x = ens.X[:, n]
        u = ens.U[:, n]
        mu = ens.mu(n)
        extra = mf_args(problem, mu)
        y_next = Y[:, n + 1]
        z = y_next[:, :, None] * ens.dW.step(n)[:, None, :] / dt if want_z else None

        if include_dxh:
            drift = problem.dxH(t, x, y_next, z, u, *extra)
        else:
            drift = np.zeros_like(y_next)
        if mean_field:
            kernel = problem.dmuH_kernel(t, x, y_next, z, u, mu)
            if kernel is not None:
                drift = drift + kernel.average_at(x)
        y_n = y_next + drift * dt
        _check_finite(y_n, "backward", n, "adjoint")

        Y[:, n] = y_n
        if Z is not None:
            Z[:, n] = z
        if on_step is not None:
            on_step(n, y_next, z, y_n)

    ens.Y = Y
    ens.Z = Z
    return ens


def backward_adjoint_socp(problem: SocpProblem, ensemble: ParticleEnsemble, keep_z: bool = True,
                          include_dxh: bool = True, on_step: Optional[StepCallback] = None) -> ParticleEnsemble:
    """
    Y_N = grad g(X_N); Y_n = Y_{n+1} + dxH(t_n, X_n, Y_{n+1}, Z_n, u_n) dt,
    Z_n = Y_{n+1} dW_n^T / dt. Z is only formed when the problem uses it.
    """
    if problem.is_mean_field:
        raise TypeError(f"{problem.name} is a mean-field problem; use backward_adjoint_mfc")
    return _backward(problem, ensemble, False, keep_z, include_dxh, on_step)


def backward_adjoint_mfc(problem: MfcProblem, ensemble: ParticleEnsemble, keep_z: bool = True,
                         include_dxh: bool = True, on_step: Optional[StepCallback] = None) -> ParticleEnsemble:
    """SOCP recursion plus the particle-averaged Lions-derivative kernels"""
    if not problem.is_mean_field:
        raise TypeError(f"{problem.name} is not a mean-field problem; use backward_adjoint_socp")
    if ensemble.mu_path is None:
        raise ValueError("ensemble was simulated without population summaries")
    return _backward(problem, ensemble, True, keep_z, include_dxh, on_step)


def backward_adjoint(problem: SocpProblem, ensemble: ParticleEnsemble, **kwargs) -> ParticleEnsemble:
    if problem.is_mean_field:
        return backward_adjoint_mfc(problem, ensemble, **kwargs)
    return backward_adjoint_socp(problem, ensemble, **kwargs)
