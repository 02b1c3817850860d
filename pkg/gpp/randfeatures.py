"""
Random Feature Regression
Frozen random hidden layer with a linear head fitted by (ridge) least squares
"""
from dataclasses import dataclass
import logging
import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.special import expit

from .errors import DimensionError, IllConditionedFitError, PolicyFormatError
from .stochastics import SeedSpec, gaussian_matrix

logger = logging.getLogger(__name__)

ACTIVATIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": np.tanh,
    "relu": lambda z: np.maximum(z, 0.0),
    "sigmoid": expit,
}

DEFAULT_RIDGE = 1e-8

# coordinates whose spread is below this (relative to their mean) are only centred
MIN_RELATIVE_SPREAD = 1e-8


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FeatureMap:
    """phi(x) = (activation(A_tilde x + b_tilde), 1)"""
    A_tilde: np.ndarray  # (d_h, d)
    b_tilde: np.ndarray  # (d_h,)
    activation: str = "tanh"
    seed: Optional[SeedSpec] = None

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation '{self.activation}', expected one of {sorted(ACTIVATIONS)}")
        A = _frozen(self.A_tilde)
        b = _frozen(self.b_tilde)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise DimensionError(f"feature map needs A (d_h, d) and b (d_h,), got {A.shape} and {b.shape}")
        object.__setattr__(self, "A_tilde", A)
        object.__setattr__(self, "b_tilde", b)

    @property
    def d(self) -> int:
        return self.A_tilde.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.A_tilde.shape[0]

    @property
    def n_features(self) -> int:
        return self.hidden_size + 1

    def features(self, x: np.ndarray) -> np.ndarray:
        """(M, d) -> (M, d_h + 1); a single point (d,) gives (d_h + 1,)"""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise DimensionError(f"expected points of dimension {self.d}, got shape {x.shape}")
        hidden = ACTIVATIONS[self.activation](pts @ self.A_tilde.T + self.b_tilde)
        phi = np.concatenate([hidden, np.ones((pts.shape[0], 1))], axis=1)
        return phi[0] if single else phi


def new_feature_map(seed: SeedSpec, d: int, d_h: int, activation: str = "tanh") -> FeatureMap:
    """Draw A_tilde and b_tilde as one (d_h, d + 1) standard normal matrix"""
    if d < 1 or d_h < 1:
        raise ValueError(f"new_feature_map needs d, d_h >= 1, got d={d}, d_h={d_h}")
    draw = gaussian_matrix(seed, d_h, d + 1)
    return FeatureMap(A_tilde=draw[:, :d], b_tilde=draw[:, d], activation=activation, seed=seed)


@dataclass(frozen=True)
class RidgeSpec:
    lam: float = DEFAULT_RIDGE

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"ridge lambda must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class RandomFeatureModel:
    """
    x -> theta phi((x - input_shift) / input_scale).

    The shift and scale are fixed when the model is fitted (identity unless
    the fit standardised its inputs) and travel with the model.
    """
    feature_map: FeatureMap
    theta: np.ndarray  # (d1, d_h + 1), bias in the last column
    clip_bound: float = math.inf
    input_shift: Optional[np.ndarray] = None  # (d,)
    input_scale: Optional[np.ndarray] = None  # (d,)

    def __post_init__(self):
        theta = _frozen(self.theta)
        if theta.ndim != 2 or theta.shape[1] != self.feature_map.n_features:
            raise DimensionError(
                f"theta must be (d1, {self.feature_map.n_features}), got {theta.shape}")
        if not self.clip_bound > 0:
            raise ValueError(f"clip_bound must be positive, got {self.clip_bound}")
        d = self.feature_map.d
        shift = _frozen(np.zeros(d) if self.input_shift is None else self.input_shift)
        scale = _frozen(np.ones(d) if self.input_scale is None else self.input_scale)
        if shift.shape != (d,) or scale.shape != (d,):
            raise DimensionError(f"input shift and scale must have shape ({d},), got {shift.shape} and {scale.shape}")
        if not np.all(scale > 0):
            raise ValueError("input scale must be positive")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "input_shift", shift)
        object.__setattr__(self, "input_scale", scale)

    @property
    def d(self) -> int:
        return self.feature_map.d

    @property
    def d1(self) -> int:
        return self.theta.shape[0]

    @property
    def standardized(self) -> bool:
        return bool(np.any(self.input_shift != 0) or np.any(self.input_scale != 1))

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.d:
            raise DimensionError(f"expected points of dimension {self.d}, got shape {x.shape}")
        return (x - self.input_shift) / self.input_scale

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.feature_map.features(self.transform(x)) @ self.theta.T

    __call__ = evaluate

    @classmethod
    def zeros(cls, feature_map: FeatureMap, d1: int, clip_bound: float = math.inf) -> "RandomFeatureModel":
        return cls(feature_map, np.zeros((d1, feature_map.n_features)), clip_bound)


def evaluate(model: RandomFeatureModel, x: np.ndarray) -> np.ndarray:
    return model.evaluate(x)


def input_standardization(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-coordinate mean and standard deviation; degenerate coordinates keep scale 1"""
    shift = points.mean(axis=0)
    spread = points.std(axis=0)
    scale = np.where(spread > MIN_RELATIVE_SPREAD * np.maximum(1.0, np.abs(shift)), spread, 1.0)
    return shift, scale


def fit(points: np.ndarray, targets: np.ndarray, feature_map: FeatureMap,
        ridge: RidgeSpec = RidgeSpec(), clip_bound: float = math.inf,
        standardize: bool = False) -> RandomFeatureModel:
    """
    Minimise sum_i |theta phi(x_i) - f_i|^2 + lam |theta|_F^2, then clip theta.

    The ridge problem is solved as the augmented least-squares system
    [Phi; sqrt(lam) I] theta^T = [F; 0] with an SVD-based solver. With
    standardize=True the points are first mapped to zero mean and unit
    variance per coordinate and the model keeps that map.
    """
    points = np.asarray(points, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    if points.ndim != 2 or targets.ndim != 2 or points.shape[0] != targets.shape[0]:
        raise DimensionError(f"fit needs points (M, d) and targets (M, d1), got {points.shape} and {targets.shape}")
    if points.shape[0] < 1:
        raise DimensionError("fit needs at least one sample")
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(targets))):
        raise ValueError("fit received non-finite points or targets")

    if points.shape[1] != feature_map.d:
        raise DimensionError(f"expected points of dimension {feature_map.d}, got shape {points.shape}")
    shift, scale = input_standardization(points) if standardize else (None, None)
    phi = feature_map.features(points if shift is None else (points - shift) / scale)
    n_feat = feature_map.n_features
    if ridge.lam > 0:
        lhs = np.vstack([phi, math.sqrt(ridge.lam) * np.eye(n_feat)])
        rhs = np.vstack([targets, np.zeros((n_feat, targets.shape[1]))])
    else:
        lhs, rhs = phi, targets

    theta_t, _, rank, _ = linalg.lstsq(lhs, rhs, lapack_driver="gelsd")
    if ridge.lam == 0 and rank < n_feat:
        logger.warning(f"Rank-deficient feature matrix: rank {rank} < {n_feat}")
        raise IllConditionedFitError()

    theta = theta_t.T
    if math.isfinite(clip_bound):
        theta = np.clip(theta, -clip_bound, clip_bound)
    return RandomFeatureModel(feature_map, theta, clip_bound, shift, scale)


def project_l2(fn_samples: Tuple[np.ndarray, np.ndarray], feature_map: FeatureMap,
               ridge: RidgeSpec = RidgeSpec(), clip_bound: float = math.inf,
               standardize: bool = False) -> RandomFeatureModel:
    """Empirical L2 projection of sampled (points, targets) onto the feature span"""
    points, targets = fn_samples
    return fit(points, targets, feature_map, ridge, clip_bound, standardize)


def feature_map_to_dict(feature_map: FeatureMap) -> Dict:
    out = {
        "d": feature_map.d,
        "hidden_size": feature_map.hidden_size,
        "activation": feature_map.activation,
    }
    if feature_map.seed is not None:
        s = feature_map.seed
        out["seed"] = {"master_seed": s.master_seed, "stream_id": s.stream_id, "substream": s.substream}
    else:
        out["A_tilde"] = feature_map.A_tilde.tolist()
        out["b_tilde"] = feature_map.b_tilde.tolist()
    return out


def feature_map_from_dict(data: Dict) -> FeatureMap:
    try:
        if "seed" in data:
            fmap = new_feature_map(SeedSpec(**data["seed"]), int(data["d"]),
                                   int(data["hidden_size"]), data["activation"])
        else:
            fmap = FeatureMap(np.array(data["A_tilde"]), np.array(data["b_tilde"]), data["activation"])
    except (KeyError, TypeError, ValueError) as e:
        raise PolicyFormatError(f"bad feature map entry: {e}") from e
    if fmap.d != data["d"] or fmap.hidden_size != data["hidden_size"]:
        raise PolicyFormatError("feature map dimensions do not match the stored header")
    return fmap


def model_to_dict(model: RandomFeatureModel) -> Dict:
    out = {
        "feature_map": feature_map_to_dict(model.feature_map),
        "d1": model.d1,
        # JSON has no infinity literal
        "clip_bound": None if math.isinf(model.clip_bound) else model.clip_bound,
        "theta": model.theta.tolist(),
    }
    if model.standardized:
        out["input_shift"] = model.input_shift.tolist()
        out["input_scale"] = model.input_scale.tolist()
    return out


def model_from_dict(data: Dict) -> RandomFeatureModel:
    fmap = feature_map_from_dict(data["feature_map"])
    clip = data.get("clip_bound")
    shift = data.get("input_shift")
    scale = data.get("input_scale")
    try:
        model = RandomFeatureModel(fmap, np.array(data["theta"], dtype=float),
                                   math.inf if clip is None else float(clip),
                                   None if shift is None else np.array(shift, dtype=float),
                                   None if scale is None else np.array(scale, dtype=float))
    except (KeyError, DimensionError, ValueError) as e:
        raise PolicyFormatError(f"bad model entry: {e}") from e
    if model.d1 != data["d1"]:
        raise PolicyFormatError(f"stored d1={data['d1']} but theta has {model.d1} rows")
    return model
