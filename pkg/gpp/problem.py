"""
Control Problem Interface
Coefficients, costs and Hamiltonian partials for SOCP and scalar-interaction MFC problems.

Every callable is vectorised over a leading particle axis:
x (M, d), u (M, d1), y (M, d), z (M, d, m) or None, t a float.
MFC callables take the population summary `mu` as their last argument.
"""
from dataclasses import dataclass, field
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .errors import DimensionError, OracleUnavailableError, PolicyFormatError
from .randfeatures import FeatureMap, RandomFeatureModel, model_from_dict, model_to_dict
from .stochastics import SeedSpec

logger = logging.getLogger(__name__)

POLICY_FORMAT_VERSION = 1


@dataclass(frozen=True)
class MeasureSummary:
    """Empirical averages of one time slice of the particle ensemble"""
    mean_state: np.ndarray
    interaction_b: np.ndarray = field(default_factory=lambda: np.zeros(0))
    interaction_f: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mean_control: Optional[np.ndarray] = None
    custom: Dict[str, float] = field(default_factory=dict)


class FactorizedKernel:
    """
    Kernel k_j(x) = sum_r weights[j, r] * basis_grad(x)[r, :].

    The particle average (1/M) sum_j k_j(x_i) collapses to one mean over j,
    so evaluation is O(M).
    """

    def __init__(self, weights: np.ndarray, basis_grad: Callable[[np.ndarray], np.ndarray]):
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.ndim == 1:
            self.weights = self.weights[:, None]
        self.basis_grad = basis_grad

    def average_at(self, points: np.ndarray) -> np.ndarray:
        w_bar = self.weights.mean(axis=0)
        basis = self.basis_grad(points)  # (P, r, out)
        return np.einsum("prk,r->pk", basis, w_bar)


class PairwiseKernel:
    """
    General kernel given by fn(j_data, points) -> (J, P, out) for a chunk of
    J source particles; averaged over all M sources in fixed-size chunks.
    """

    def __init__(self, data: Sequence[np.ndarray], fn: Callable, chunk: int = 256):
        self.data = [np.asarray(a) for a in data]
        self.fn = fn
        self.chunk = chunk
        self.M = self.data[0].shape[0]

    def average_at(self, points: np.ndarray) -> np.ndarray:
        total = None
        for lo in range(0, self.M, self.chunk):
            part = [a[lo:lo + self.chunk] for a in self.data]
            contrib = self.fn(part, points).sum(axis=0)
            total = contrib if total is None else total + contrib
        return total / self.M


Kernel = Union[FactorizedKernel, PairwiseKernel]


class InitialLaw:
    """Initial distribution; `draw(gen, rows)` returns (rows, d)"""

    def __init__(self, draw: Callable[[np.random.Generator, int], np.ndarray], name: str = "custom",
                 mean: Optional[float] = None, variance: Optional[float] = None):
        self.draw = draw
        self.name = name
        self.mean = mean
        self.variance = variance

    def __repr__(self):
        return f"InitialLaw({self.name})"


class SocpProblem:
    """Base class for stochastic optimal control problems"""

    name = "socp"
    is_mean_field = False
    # False when neither sigma nor f depends on (x, u) through z; the engine then skips Z.
    uses_z = True
    # State coordinates the feedback control sees; None means all of them.
    control_input_dims: Optional[Sequence[int]] = None
    has_oracle = False

    def __init__(self, d: int, m: int, d1: int, T: float, initial_law: InitialLaw):
        if min(d, m, d1) < 1:
            raise DimensionError(f"dimensions must be >= 1, got d={d}, m={m}, d1={d1}")
        if not T > 0:
            raise ValueError(f"horizon T must be positive, got {T}")
        self.d = d
        self.m = m
        self.d1 = d1
        self.T = T
        self.initial_law = initial_law

    @property
    def policy_input_dim(self) -> int:
        return self.d if self.control_input_dims is None else len(self.control_input_dims)

    def policy_inputs(self, x: np.ndarray) -> np.ndarray:
        return x if self.control_input_dims is None else x[:, list(self.control_input_dims)]

    def b(self, t, x, u):
        raise NotImplementedError

    def sigma(self, t, x, u):
        raise NotImplementedError

    def sigma_dw(self, t, x, u, dw):
        """sigma(t, x, u) applied to increments dw (M, m); override for diagonal noise"""
        return np.einsum("idk,ik->id", self.sigma(t, x, u), dw)

    def f(self, t, x, u):
        raise NotImplementedError

    def g(self, x):
        raise NotImplementedError

    def grad_g(self, x):
        raise NotImplementedError

    def dxH(self, t, x, y, z, u):
        raise NotImplementedError

    def duH(self, t, x, y, z, u):
        raise NotImplementedError

    def oracle_control(self, t, x, mu=None):
        raise OracleUnavailableError(f"{self.name} has no analytic optimal control")

    def describe(self) -> Dict:
        return {"name": self.name, "mean_field": self.is_mean_field, "d": self.d, "m": self.m,
                "d1": self.d1, "T": self.T, "initial_law": self.initial_law.name}


class MfcProblem(SocpProblem):
    """
    Base class for mean-field control problems with scalar interactions.

    Subclasses may return kernels from dmuH_kernel, terminal_kernel and
    (extended MFC) dnuH_kernel; None means the term is absent.
    """

    name = "mfc"
    is_mean_field = True

    def interaction_b(self, x) -> np.ndarray:
        return np.zeros((x.shape[0], 0))

    def interaction_f(self, x) -> np.ndarray:
        return np.zeros((x.shape[0], 0))

    def summary(self, x: np.ndarray, u: Optional[np.ndarray] = None) -> MeasureSummary:
        return MeasureSummary(
            mean_state=x.mean(axis=0),
            interaction_b=self.interaction_b(x).mean(axis=0),
            interaction_f=self.interaction_f(x).mean(axis=0),
            mean_control=None if u is None else u.mean(axis=0),
        )

    def sigma_dw(self, t, x, u, dw, mu):
        return np.einsum("idk,ik->id", self.sigma(t, x, u, mu), dw)

    def dmuH_kernel(self, t, x, y, z, u, mu) -> Optional[Kernel]:
        return None

    def terminal_kernel(self, x, mu) -> Optional[Kernel]:
        return None

    def dnuH_kernel(self, t, x, y, z, u, mu) -> Optional[Kernel]:
        return None


class _MeanFieldView(MfcProblem):
    """An SOCP problem seen through the MFC interface; mu is ignored"""

    def __init__(self, inner: SocpProblem):
        super().__init__(inner.d, inner.m, inner.d1, inner.T, inner.initial_law)
        self.inner = inner
        self.name = inner.name
        self.uses_z = inner.uses_z
        self.control_input_dims = inner.control_input_dims
        self.has_oracle = inner.has_oracle

    def b(self, t, x, u, mu):
        return self.inner.b(t, x, u)

    def sigma(self, t, x, u, mu):
        return self.inner.sigma(t, x, u)

    def sigma_dw(self, t, x, u, dw, mu):
        return self.inner.sigma_dw(t, x, u, dw)

    def f(self, t, x, u, mu):
        return self.inner.f(t, x, u)

    def g(self, x, mu):
        return self.inner.g(x)

    def grad_g(self, x, mu):
        return self.inner.grad_g(x)

    def dxH(self, t, x, y, z, u, mu):
        return self.inner.dxH(t, x, y, z, u)

    def duH(self, t, x, y, z, u, mu):
        return self.inner.duH(t, x, y, z, u)

    def oracle_control(self, t, x, mu=None):
        return self.inner.oracle_control(t, x)


def as_mean_field(problem: SocpProblem) -> MfcProblem:
    if problem.is_mean_field:
        return problem
    return _MeanFieldView(problem)


def measure_summary(states: np.ndarray, controls: Optional[np.ndarray], problem: SocpProblem) -> MeasureSummary:
    if states.ndim != 2 or states.shape[0] < 1:
        raise DimensionError(f"states must be (M, d) with M >= 1, got {states.shape}")
    if problem.is_mean_field:
        return problem.summary(states, controls)
    return MeasureSummary(mean_state=states.mean(axis=0),
                          mean_control=None if controls is None else controls.mean(axis=0))


def mf_args(problem: SocpProblem, mu: Optional[MeasureSummary]) -> tuple:
    """Trailing argument tuple for problem callables"""
    return (mu,) if problem.is_mean_field else ()


class OracleController:
    """Analytic feedback control u*(t, x, mu) injected into a policy"""

    def __init__(self, fn: Callable, d1: int):
        self.fn = fn
        self.d1 = d1

    def __call__(self, t, x, mu=None) -> np.ndarray:
        return np.asarray(self.fn(t, x, mu), dtype=float).reshape(x.shape[0], self.d1)


class PolicySequence:
    """Piecewise-constant feedback control: controllers[n] acts on [t_n, t_{n+1})"""

    def __init__(self, controllers: List[Union[RandomFeatureModel, OracleController]], times: np.ndarray,
                 input_dims: Optional[Sequence[int]] = None):
        times = np.asarray(times, dtype=float)
        if len(controllers) != len(times):
            raise DimensionError(f"{len(controllers)} controllers for {len(times)} time points")
        self.controllers = list(controllers)
        self.times = times
        self.input_dims = None if input_dims is None else list(input_dims)

    def __len__(self):
        return len(self.controllers)

    def __getitem__(self, n):
        return self.controllers[n]

    @property
    def N(self) -> int:
        return len(self.controllers)

    def control(self, n: int, x: np.ndarray, mu: Optional[MeasureSummary] = None) -> np.ndarray:
        ctrl = self.controllers[n]
        if isinstance(ctrl, RandomFeatureModel):
            inputs = x if self.input_dims is None else x[:, self.input_dims]
            return ctrl.evaluate(inputs)
        return ctrl(self.times[n], x, mu)

    @classmethod
    def zeros(cls, feature_maps: Sequence[FeatureMap], d1: int, times: np.ndarray,
              input_dims: Optional[Sequence[int]] = None, clip_bound: float = math.inf) -> "PolicySequence":
        return cls([RandomFeatureModel.zeros(fm, d1, clip_bound) for fm in feature_maps], times, input_dims)

    @classmethod
    def from_oracle(cls, problem: SocpProblem, N: int) -> "PolicySequence":
        times = np.arange(N) * (problem.T / N)
        ctrl = OracleController(problem.oracle_control, problem.d1)
        return cls([ctrl] * N, times)

    def to_dict(self) -> Dict:
        if not all(isinstance(c, RandomFeatureModel) for c in self.controllers):
            raise PolicyFormatError("only fitted random-feature policies can be serialised")
        return {
            "version": POLICY_FORMAT_VERSION,
            "N": self.N,
            "times": self.times.tolist(),
            "input_dims": self.input_dims,
            "models": [model_to_dict(c) for c in self.controllers],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "PolicySequence":
        version = data.get("version")
        if version != POLICY_FORMAT_VERSION:
            raise PolicyFormatError(f"unsupported policy format version: {version}")
        try:
            models = [model_from_dict(m) for m in data["models"]]
            policy = cls(models, np.array(data["times"], dtype=float), data.get("input_dims"))
        except (KeyError, DimensionError) as e:
            raise PolicyFormatError(f"malformed policy file: {e}") from e
        if policy.N != data["N"]:
            raise PolicyFormatError(f"policy header says N={data['N']}, found {policy.N} models")
        return policy


def hamiltonian(problem: SocpProblem, t, x, y, z, u, mu=None) -> np.ndarray:
    """H = b.y + tr(sigma^T z) + f, per particle"""
    extra = mf_args(problem, mu)
    h = np.sum(problem.b(t, x, u, *extra) * y, axis=1)
    h = h + np.einsum("idk,idk->i", problem.sigma(t, x, u, *extra), z)
    return h + problem.f(t, x, u, *extra)


@dataclass
class HamiltonianCheck:
    max_dx_deviation: float
    max_du_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.max_dx_deviation, self.max_du_deviation)

    def passed(self, tol: float) -> bool:
        return self.max_deviation <= tol


def hamiltonian_partial_check(problem: SocpProblem, n_points: int = 16, eps: float = 1e-4,
                              seed: SeedSpec = SeedSpec(0), t: Optional[float] = None) -> HamiltonianCheck:
    """Compare dxH and duH with central differences of H at random points (mu held fixed)"""
    gen = seed.generator()
    d, m, d1 = problem.d, problem.m, problem.d1
    t = 0.5 * problem.T if t is None else t
    x = gen.standard_normal((n_points, d))
    y = gen.standard_normal((n_points, d))
    z = gen.standard_normal((n_points, d, m))
    u = gen.standard_normal((n_points, d1))
    mu = measure_summary(x, u, problem) if problem.is_mean_field else None
    extra = mf_args(problem, mu)

    def central(shift_x: bool, k: int) -> np.ndarray:
        if shift_x:
            e = np.zeros_like(x)
            e[:, k] = eps
            hi = hamiltonian(problem, t, x + e, y, z, u, mu)
            lo = hamiltonian(problem, t, x - e, y, z, u, mu)
        else:
            e = np.zeros_like(u)
            e[:, k] = eps
            hi = hamiltonian(problem, t, x, y, z, u + e, mu)
            lo = hamiltonian(problem, t, x, y, z, u - e, mu)
        return (hi - lo) / (2 * eps)

    fd_x = np.stack([central(True, k) for k in range(d)], axis=1)
    fd_u = np.stack([central(False, k) for k in range(d1)], axis=1)
    dx = problem.dxH(t, x, y, z, u, *extra)
    du = problem.duH(t, x, y, z, u, *extra)
    report = HamiltonianCheck(float(np.max(np.abs(dx - fd_x))), float(np.max(np.abs(du - fd_u))))
    logger.info(f"Hamiltonian check for {problem.name}: dx {report.max_dx_deviation:.3e}, "
                f"du {report.max_du_deviation:.3e}")
    return report
